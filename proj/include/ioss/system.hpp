#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ioss/expr.hpp"

namespace ioss {

/// Parsed continuous-time model xdot = f(x,u,d), y = h(x,u,d).
class SystemSpec {
 public:
  SystemSpec(std::string name, Dims dims, std::vector<Expr> f, std::vector<Expr> h);

  const std::string& name() const { return name_; }
  const Dims& dims() const { return dims_; }
  const std::vector<Expr>& f() const { return f_; }
  const std::vector<Expr>& h() const { return h_; }

  /// True when every output expression is (syntactically) affine in (x, u).
  bool output_is_affine() const;

 private:
  std::string name_;
  Dims dims_;
  std::vector<Expr> f_;
  std::vector<Expr> h_;
};

/// Model file grammar:
///   dims n q m p
///   f1 = <expr> ... fn = <expr>
///   h1 = <expr> ... hp = <expr>
/// `#` starts a comment; blank lines are ignored.
SystemSpec parse_model(std::string_view text, std::string name = "model");
SystemSpec load_model(const std::filesystem::path& path);

/// Values and exact Jacobians of f and h at one point.
struct PointEval {
  Eigen::VectorXd x, u, d;
  Eigen::VectorXd f_val;
  Eigen::VectorXd h_val;
  Eigen::MatrixXd A;  // df/dx, n x n
  Eigen::MatrixXd B;  // df/du, n x q
  Eigen::MatrixXd C;  // dh/dx, p x n
  Eigen::MatrixXd D;  // dh/du, p x q

  /// [A B], the n x (n+q) Jacobian of f in (x, u).
  Eigen::MatrixXd AB() const;
};

Eigen::VectorXd stack_point(const Dims& dims, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                            const Eigen::VectorXd& d);

PointEval eval_point(const SystemSpec& sys, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                     const Eigen::VectorXd& d);
/// Same, with z = [x; u; d].
PointEval eval_point(const SystemSpec& sys, const Eigen::VectorXd& z);

Eigen::VectorXd eval_f(const SystemSpec& sys, const Eigen::VectorXd& z);
Eigen::VectorXd eval_h(const SystemSpec& sys, const Eigen::VectorXd& z);

/// f at z with tangents propagated from `seed` (nz x k): on return `jac`
/// holds df/ds (n x k). This is the building block for differentiating
/// compositions such as one-step maps.
Eigen::VectorXd eval_f_seeded(const SystemSpec& sys, const Eigen::VectorXd& z,
                              const Eigen::MatrixXd& seed, Eigen::MatrixXd& jac);

/// Coordinates of z that the CT Jacobians [A B], C, D can vary with.
std::vector<bool> ct_jacobian_dependencies(const SystemSpec& sys);

/// Coordinates of z that the RK2 one-step Jacobians can vary with: those of
/// A and B, plus everything entering the midpoint x + (tau/2) f along the
/// state directions A depends on.
std::vector<bool> rk2_jacobian_dependencies(const SystemSpec& sys);

/// "x1", "u2", ... for slot i of z.
std::string coordinate_name(const Dims& dims, int slot);

}  // namespace ioss
