#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace ioss {

/// Dimensions of a model: state n, input q, time-varying parameter m, output p.
/// Evaluation points are stacked as z = [x; u; d].
struct Dims {
  int n = 0;
  int q = 0;
  int m = 0;
  int p = 0;

  int nz() const { return n + q + m; }
  /// Number of coordinates Jacobians are taken with respect to (x and u).
  int nxu() const { return n + q; }

  bool operator==(const Dims&) const = default;
};

enum class VarKind : std::uint8_t { State, Input, Param };

struct VarRef {
  VarKind kind = VarKind::State;
  int index = 0;  // 0-based

  /// Slot in the stacked vector z = [x; u; d].
  int slot(const Dims& dims) const;
  std::string name() const;  // "x1", "u3", ...
};

enum class Op : std::uint8_t {
  Const,
  Var,
  Neg,
  Sin,
  Cos,
  Exp,
  Tanh,
  Sqrt,
  Add,
  Sub,
  Mul,
  Div,
  Pow,  // integer exponent
};

/// Expression tree over the variables of a model, stored as a node list in
/// post-order (children always precede their parent; the root is last).
/// Evaluation is a single forward sweep that also propagates tangents.
class Expr {
 public:
  struct Node {
    Op op = Op::Const;
    double value = 0.0;  // Const
    VarRef var{};        // Var
    int slot = -1;       // Var: index into z
    int lhs = -1;
    int rhs = -1;
    int exponent = 0;  // Pow
  };

  Expr() = default;

  const std::vector<Node>& nodes() const { return nodes_; }
  bool empty() const { return nodes_.empty(); }

  /// Value at z. Throws DomainError (with an empty expression label) when a
  /// primitive is evaluated outside its domain.
  double evaluate(std::span<const double> z) const;

  /// Value at z and its directional derivatives. `seed` holds dz/ds as an
  /// (nz x k) matrix; `grad` receives d(expr)/ds (length k). Passing identity
  /// seeds for x and u yields a row of the exact Jacobian.
  double evaluate(std::span<const double> z,
                  const Eigen::Ref<const Eigen::MatrixXd>& seed,
                  Eigen::Ref<Eigen::RowVectorXd> grad) const;

  std::string to_string() const;

  // Parser-facing construction. Each returns the index of the new node.
  int push_const(double v);
  int push_var(VarRef var, int slot);
  int push_unary(Op op, int arg);
  int push_binary(Op op, int lhs, int rhs);
  int push_pow(int base, int exponent);

 private:
  std::vector<Node> nodes_;
};

/// Parses a right-hand side such as "-2*0.16*x1^2 + u1". `line` and
/// `column_offset` locate the text inside a larger file for error messages.
Expr parse_expression(std::string_view text, const Dims& dims, int line = 1,
                      int column_offset = 0);

/// Syntactic affinity in (x, u): true when every x/u occurrence enters
/// through sums and multiplications by x/u-free factors. Conservative: an
/// expression that is affine only after cancellation is reported as false.
bool is_affine_in_state_input(const Expr& e, const Dims& dims);

/// Slots of z that appear anywhere in the expression.
std::vector<bool> variables_used(const Expr& e, const Dims& dims);

/// Slots of z on which the (x,u)-gradient of the expression can depend.
std::vector<bool> gradient_dependencies(const Expr& e, const Dims& dims);

}  // namespace ioss
