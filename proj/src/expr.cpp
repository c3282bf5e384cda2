#include "ioss/expr.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ioss/error.hpp"

namespace ioss {

ParseError::ParseError(Kind kind, int line, int column,
                       const std::string& message)
    : Error(line > 0 ? "line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + message
                     : message),
      kind_(kind),
      line_(line),
      column_(column) {}

DomainError::DomainError(std::string expression, const std::string& message)
    : Error(expression.empty() ? message : expression + ": " + message),
      expression_(std::move(expression)) {}

TransferError::TransferError(std::string binding, const std::string& message)
    : Error(message), binding_(std::move(binding)) {}

int VarRef::slot(const Dims& dims) const {
  switch (kind) {
    case VarKind::State:
      return index;
    case VarKind::Input:
      return dims.n + index;
    case VarKind::Param:
      return dims.n + dims.q + index;
  }
  return -1;
}

std::string VarRef::name() const {
  const char prefix = kind == VarKind::State ? 'x' : kind == VarKind::Input ? 'u' : 'd';
  return prefix + std::to_string(index + 1);
}

// ---------------------------------------------------------------------------
// Construction

int Expr::push_const(double v) {
  Node nd;
  nd.op = Op::Const;
  nd.value = v;
  nodes_.push_back(nd);
  return static_cast<int>(nodes_.size()) - 1;
}

int Expr::push_var(VarRef var, int slot) {
  Node nd;
  nd.op = Op::Var;
  nd.var = var;
  nd.slot = slot;
  nodes_.push_back(nd);
  return static_cast<int>(nodes_.size()) - 1;
}

int Expr::push_unary(Op op, int arg) {
  Node nd;
  nd.op = op;
  nd.lhs = arg;
  nodes_.push_back(nd);
  return static_cast<int>(nodes_.size()) - 1;
}

int Expr::push_binary(Op op, int lhs, int rhs) {
  Node nd;
  nd.op = op;
  nd.lhs = lhs;
  nd.rhs = rhs;
  nodes_.push_back(nd);
  return static_cast<int>(nodes_.size()) - 1;
}

int Expr::push_pow(int base, int exponent) {
  Node nd;
  nd.op = Op::Pow;
  nd.lhs = base;
  nd.exponent = exponent;
  nodes_.push_back(nd);
  return static_cast<int>(nodes_.size()) - 1;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double ipow(double base, int e) {
  const bool invert = e < 0;
  unsigned k = static_cast<unsigned>(invert ? -static_cast<long>(e) : e);
  double result = 1.0;
  double b = base;
  while (k != 0) {
    if (k & 1U) result *= b;
    k >>= 1U;
    if (k != 0) b *= b;
  }
  return invert ? 1.0 / result : result;
}

const char* op_name(Op op) {
  switch (op) {
    case Op::Const: return "constant";
    case Op::Var: return "variable";
    case Op::Neg: return "negation";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Tanh: return "tanh";
    case Op::Sqrt: return "sqrt";
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Pow: return "^";
  }
  return "?";
}

}  // namespace

double Expr::evaluate(std::span<const double> z) const {
  Eigen::MatrixXd no_seed(static_cast<Eigen::Index>(z.size()), 0);
  Eigen::RowVectorXd no_grad(0);
  return evaluate(z, no_seed, no_grad);
}

double Expr::evaluate(std::span<const double> z,
                      const Eigen::Ref<const Eigen::MatrixXd>& seed,
                      Eigen::Ref<Eigen::RowVectorXd> grad) const {
  const std::size_t count = nodes_.size();
  const Eigen::Index k = seed.cols();
  thread_local std::vector<double> val;
  thread_local std::vector<double> tan;
  val.resize(count);
  tan.resize(count * static_cast<std::size_t>(k));

  for (std::size_t i = 0; i < count; ++i) {
    const Node& nd = nodes_[i];
    double* g = tan.data() + i * k;
    const double a = nd.lhs >= 0 ? val[nd.lhs] : 0.0;
    const double* ga = nd.lhs >= 0 ? tan.data() + nd.lhs * k : nullptr;
    const double b = nd.rhs >= 0 ? val[nd.rhs] : 0.0;
    const double* gb = nd.rhs >= 0 ? tan.data() + nd.rhs * k : nullptr;
    double v = 0.0;

    switch (nd.op) {
      case Op::Const:
        v = nd.value;
        for (Eigen::Index j = 0; j < k; ++j) g[j] = 0.0;
        break;
      case Op::Var:
        v = z[nd.slot];
        for (Eigen::Index j = 0; j < k; ++j) g[j] = seed(nd.slot, j);
        break;
      case Op::Neg:
        v = -a;
        for (Eigen::Index j = 0; j < k; ++j) g[j] = -ga[j];
        break;
      case Op::Sin: {
        v = std::sin(a);
        const double c = std::cos(a);
        for (Eigen::Index j = 0; j < k; ++j) g[j] = c * ga[j];
        break;
      }
      case Op::Cos: {
        v = std::cos(a);
        const double s = -std::sin(a);
        for (Eigen::Index j = 0; j < k; ++j) g[j] = s * ga[j];
        break;
      }
      case Op::Exp:
        v = std::exp(a);
        for (Eigen::Index j = 0; j < k; ++j) g[j] = v * ga[j];
        break;
      case Op::Tanh: {
        v = std::tanh(a);
        const double d = 1.0 - v * v;
        for (Eigen::Index j = 0; j < k; ++j) g[j] = d * ga[j];
        break;
      }
      case Op::Sqrt:
        if (a < 0.0) throw DomainError("", "sqrt of negative argument " + std::to_string(a));
        if (a == 0.0 && k > 0)
          throw DomainError("", "sqrt is not differentiable at 0");
        v = std::sqrt(a);
        for (Eigen::Index j = 0; j < k; ++j) g[j] = ga[j] / (2.0 * v);
        break;
      case Op::Add:
        v = a + b;
        for (Eigen::Index j = 0; j < k; ++j) g[j] = ga[j] + gb[j];
        break;
      case Op::Sub:
        v = a - b;
        for (Eigen::Index j = 0; j < k; ++j) g[j] = ga[j] - gb[j];
        break;
      case Op::Mul:
        v = a * b;
        for (Eigen::Index j = 0; j < k; ++j) g[j] = ga[j] * b + a * gb[j];
        break;
      case Op::Div:
        if (b == 0.0) throw DomainError("", "division by zero");
        v = a / b;
        for (Eigen::Index j = 0; j < k; ++j) g[j] = (ga[j] - v * gb[j]) / b;
        break;
      case Op::Pow: {
        const int e = nd.exponent;
        if (e == 0) {
          v = 1.0;
          for (Eigen::Index j = 0; j < k; ++j) g[j] = 0.0;
          break;
        }
        if (a == 0.0 && e < 0) throw DomainError("", "zero raised to a negative power");
        v = ipow(a, e);
        const double d = e == 1 ? 1.0 : static_cast<double>(e) * ipow(a, e - 1);
        for (Eigen::Index j = 0; j < k; ++j) g[j] = d * ga[j];
        break;
      }
    }

    if (!std::isfinite(v)) {
      throw DomainError("", std::string("non-finite value produced by ") + op_name(nd.op));
    }
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!std::isfinite(g[j])) {
        throw DomainError("", std::string("non-finite derivative produced by ") +
                                  op_name(nd.op));
      }
    }
    val[i] = v;
  }

  if (count == 0) {
    grad.setZero();
    return 0.0;
  }
  const double* groot = tan.data() + (count - 1) * k;
  for (Eigen::Index j = 0; j < k; ++j) grad[j] = groot[j];
  return val[count - 1];
}

// ---------------------------------------------------------------------------
// Printing

namespace {

void print_node(const std::vector<Expr::Node>& nodes, int i, std::ostream& os) {
  const auto& nd = nodes[i];
  switch (nd.op) {
    case Op::Const: {
      std::ostringstream tmp;
      tmp.precision(17);
      tmp << nd.value;
      os << tmp.str();
      return;
    }
    case Op::Var:
      os << nd.var.name();
      return;
    case Op::Neg:
      os << "(-";
      print_node(nodes, nd.lhs, os);
      os << ")";
      return;
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Tanh:
    case Op::Sqrt:
      os << op_name(nd.op) << "(";
      print_node(nodes, nd.lhs, os);
      os << ")";
      return;
    case Op::Pow:
      os << "(";
      print_node(nodes, nd.lhs, os);
      os << "^" << nd.exponent << ")";
      return;
    default:
      os << "(";
      print_node(nodes, nd.lhs, os);
      os << " " << op_name(nd.op) << " ";
      print_node(nodes, nd.rhs, os);
      os << ")";
  }
}

}  // namespace

std::string Expr::to_string() const {
  if (nodes_.empty()) return "";
  std::ostringstream os;
  print_node(nodes_, static_cast<int>(nodes_.size()) - 1, os);
  return os.str();
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
 public:
  Parser(std::string_view text, const Dims& dims, int line, int column_offset)
      : text_(text), dims_(dims), line_(line), col0_(column_offset) {}

  Expr run() {
    skip_ws();
    if (pos_ >= text_.size()) fail(ParseError::Kind::Syntax, "empty expression");
    parse_sum();
    skip_ws();
    if (pos_ < text_.size()) {
      fail(ParseError::Kind::Syntax,
           "unexpected character '" + std::string(1, text_[pos_]) + "'");
    }
    return std::move(expr_);
  }

 private:
  [[noreturn]] void fail(ParseError::Kind kind, const std::string& msg) const {
    throw ParseError(kind, line_, col0_ + static_cast<int>(pos_) + 1, msg);
  }

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                                   text_[pos_] == '\r')) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(ParseError::Kind::Syntax, std::string("expected '") + c + "'");
  }

  int parse_sum() {
    int lhs = parse_product();
    for (;;) {
      if (accept('+')) {
        lhs = expr_.push_binary(Op::Add, lhs, parse_product());
      } else if (accept('-')) {
        lhs = expr_.push_binary(Op::Sub, lhs, parse_product());
      } else {
        return lhs;
      }
    }
  }

  int parse_product() {
    int lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = expr_.push_binary(Op::Mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = expr_.push_binary(Op::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  int parse_unary() {
    if (accept('-')) return expr_.push_unary(Op::Neg, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  int parse_power() {
    const int base = parse_primary();
    if (!accept('^')) return base;
    const bool paren = accept('(');
    int sign = 1;
    if (accept('-')) {
      sign = -1;
    } else {
      accept('+');
    }
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail(ParseError::Kind::Syntax, "exponent must be an integer literal");
    if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E')) {
      fail(ParseError::Kind::Syntax, "exponent must be an integer literal");
    }
    int e = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, e);
    if (ec != std::errc() || e > 1024) fail(ParseError::Kind::Syntax, "exponent out of range");
    if (paren) expect(')');
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '^') {
      fail(ParseError::Kind::Syntax, "chained exponents need parentheses");
    }
    return expr_.push_pow(base, sign * e);
  }

  int parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail(ParseError::Kind::Syntax, "unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      const int inner = parse_sum();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    fail(ParseError::Kind::Syntax, "unexpected character '" + std::string(1, c) + "'");
  }

  int parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      const std::size_t exp_start = pos_;
      digits();
      if (exp_start == pos_) pos_ = save;
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (ec != std::errc() || ptr != text_.data() + pos_) {
      pos_ = start;
      fail(ParseError::Kind::Syntax, "malformed number");
    }
    return expr_.push_const(v);
  }

  int parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view id = text_.substr(start, pos_ - start);

    static constexpr std::pair<std::string_view, Op> kFunctions[] = {
        {"sin", Op::Sin}, {"cos", Op::Cos}, {"exp", Op::Exp}, {"tanh", Op::Tanh}, {"sqrt", Op::Sqrt}};
    for (const auto& [fname, op] : kFunctions) {
      if (id == fname) {
        expect('(');
        const int arg = parse_sum();
        expect(')');
        return expr_.push_unary(op, arg);
      }
    }
    if (id == "pi") return expr_.push_const(std::numbers::pi);

    VarRef ref;
    int limit = 0;
    const char prefix = id[0];
    if (prefix == 'x') {
      ref.kind = VarKind::State;
      limit = dims_.n;
    } else if (prefix == 'u') {
      ref.kind = VarKind::Input;
      limit = dims_.q;
    } else if (prefix == 'd') {
      ref.kind = VarKind::Param;
      limit = dims_.m;
    } else {
      pos_ = start;
      fail(ParseError::Kind::UndeclaredVariable, "unknown identifier '" + std::string(id) + "'");
    }
    int index = 0;
    const auto digits = id.substr(1);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
    if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size()) {
      pos_ = start;
      fail(ParseError::Kind::UndeclaredVariable, "unknown identifier '" + std::string(id) + "'");
    }
    if (index < 1 || index > limit) {
      pos_ = start;
      fail(ParseError::Kind::UndeclaredVariable,
           "undeclared variable '" + std::string(id) + "' (declared " + std::string(1, prefix) +
               "1.." + std::string(1, prefix) + std::to_string(limit) + ")");
    }
    ref.index = index - 1;
    return expr_.push_var(ref, ref.slot(dims_));
  }

  std::string_view text_;
  const Dims& dims_;
  int line_;
  int col0_;
  std::size_t pos_ = 0;
  Expr expr_;
};

}  // namespace

Expr parse_expression(std::string_view text, const Dims& dims, int line, int column_offset) {
  return Parser(text, dims, line, column_offset).run();
}

// ---------------------------------------------------------------------------
// Structural analysis

namespace {

enum class Shape { Constant, Affine, Nonlinear };

bool is_xu_slot(int slot, const Dims& dims) { return slot < dims.nxu(); }

using SlotSet = std::vector<bool>;

void unite(SlotSet& into, const SlotSet& from) {
  for (std::size_t i = 0; i < into.size(); ++i) into[i] = into[i] || from[i];
}

bool touches_xu(const SlotSet& s, const Dims& dims) {
  for (int i = 0; i < dims.nxu(); ++i)
    if (s[i]) return true;
  return false;
}

struct SlotAnalysis {
  std::vector<SlotSet> vars;
  std::vector<SlotSet> deps;
};

SlotAnalysis analyse_slots(const Expr& e, const Dims& dims) {
  const auto& nodes = e.nodes();
  const auto nz = static_cast<std::size_t>(dims.nz());
  SlotAnalysis out;
  out.vars.assign(nodes.size(), SlotSet(nz, false));
  out.deps.assign(nodes.size(), SlotSet(nz, false));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& nd = nodes[i];
    SlotSet& vars = out.vars[i];
    SlotSet& deps = out.deps[i];
    if (nd.op == Op::Const) continue;
    if (nd.op == Op::Var) {
      vars[nd.slot] = true;
      continue;
    }
    const SlotSet& va = out.vars[nd.lhs];
    const SlotSet& da = out.deps[nd.lhs];
    const bool xa = touches_xu(va, dims);
    unite(vars, va);
    unite(deps, da);
    switch (nd.op) {
      case Op::Neg:
        break;
      case Op::Sin:
      case Op::Cos:
      case Op::Exp:
      case Op::Tanh:
      case Op::Sqrt:
        if (xa) unite(deps, va);
        break;
      case Op::Pow:
        if (nd.exponent == 0) {
          deps.assign(nz, false);
        } else if (nd.exponent != 1 && xa) {
          unite(deps, va);
        }
        break;
      case Op::Add:
      case Op::Sub:
        unite(vars, out.vars[nd.rhs]);
        unite(deps, out.deps[nd.rhs]);
        break;
      case Op::Mul: {
        const SlotSet& vb = out.vars[nd.rhs];
        const bool xb = touches_xu(vb, dims);
        unite(vars, vb);
        unite(deps, out.deps[nd.rhs]);
        if (xa) unite(deps, vb);
        if (xb) unite(deps, va);
        break;
      }
      case Op::Div: {
        const SlotSet& vb = out.vars[nd.rhs];
        const bool xb = touches_xu(vb, dims);
        unite(vars, vb);
        unite(deps, out.deps[nd.rhs]);
        if (xa) unite(deps, vb);
        if (xb) {
          unite(deps, va);
          unite(deps, vb);
        }
        break;
      }
      default:
        break;
    }
  }
  return out;
}

}  // namespace

bool is_affine_in_state_input(const Expr& e, const Dims& dims) {
  const auto& nodes = e.nodes();
  std::vector<Shape> shape(nodes.size(), Shape::Constant);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& nd = nodes[i];
    const Shape a = nd.lhs >= 0 ? shape[nd.lhs] : Shape::Constant;
    const Shape b = nd.rhs >= 0 ? shape[nd.rhs] : Shape::Constant;
    Shape s = Shape::Constant;
    switch (nd.op) {
      case Op::Const:
        s = Shape::Constant;
        break;
      case Op::Var:
        s = is_xu_slot(nd.slot, dims) ? Shape::Affine : Shape::Constant;
        break;
      case Op::Neg:
        s = a;
        break;
      case Op::Sin:
      case Op::Cos:
      case Op::Exp:
      case Op::Tanh:
      case Op::Sqrt:
        s = a == Shape::Constant ? Shape::Constant : Shape::Nonlinear;
        break;
      case Op::Add:
      case Op::Sub:
        s = std::max(a, b);
        break;
      case Op::Mul:
        if (a == Shape::Constant) {
          s = b;
        } else if (b == Shape::Constant) {
          s = a;
        } else {
          s = Shape::Nonlinear;
        }
        break;
      case Op::Div:
        s = b == Shape::Constant ? a : Shape::Nonlinear;
        break;
      case Op::Pow:
        if (nd.exponent == 0 || a == Shape::Constant) {
          s = Shape::Constant;
        } else if (nd.exponent == 1) {
          s = a;
        } else {
          s = Shape::Nonlinear;
        }
        break;
    }
    shape[i] = s;
  }
  return nodes.empty() || shape.back() != Shape::Nonlinear;
}

std::vector<bool> variables_used(const Expr& e, const Dims& dims) {
  if (e.empty()) return std::vector<bool>(dims.nz(), false);
  return analyse_slots(e, dims).vars.back();
}

std::vector<bool> gradient_dependencies(const Expr& e, const Dims& dims) {
  if (e.empty()) return std::vector<bool>(dims.nz(), false);
  return analyse_slots(e, dims).deps.back();
}

}  // namespace ioss
