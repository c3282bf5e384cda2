#include "ioss/system.hpp"

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>

#include "ioss/error.hpp"

namespace ioss {

SystemSpec::SystemSpec(std::string name, Dims dims, std::vector<Expr> f, std::vector<Expr> h)
    : name_(std::move(name)), dims_(dims), f_(std::move(f)), h_(std::move(h)) {
  if (dims_.n < 1 || dims_.p < 1 || dims_.q < 0 || dims_.m < 0) {
    throw DimensionError("model dimensions require n >= 1, p >= 1, q >= 0, m >= 0");
  }
  if (static_cast<int>(f_.size()) != dims_.n || static_cast<int>(h_.size()) != dims_.p) {
    throw DimensionError("expression count does not match declared dimensions");
  }
  for (const auto* list : {&f_, &h_}) {
    for (const Expr& e : *list) {
      for (const auto& nd : e.nodes()) {
        if (nd.op == Op::Var && (nd.slot < 0 || nd.slot >= dims_.nz())) {
          throw DimensionError("variable " + nd.var.name() + " outside declared dimensions");
        }
      }
    }
  }
}

bool SystemSpec::output_is_affine() const {
  for (const Expr& e : h_)
    if (!is_affine_in_state_input(e, dims_)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Model files

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

int leading_ws(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  return first == std::string_view::npos ? static_cast<int>(s.size()) : static_cast<int>(first);
}

Dims parse_dims_line(std::string_view line, int lineno) {
  std::istringstream in{std::string(line)};
  std::string keyword;
  in >> keyword;
  if (keyword != "dims") {
    throw ParseError(ParseError::Kind::Syntax, lineno, 1,
                     "first line must be 'dims n q m p'");
  }
  long vals[4];
  for (long& v : vals) {
    if (!(in >> v)) {
      throw ParseError(ParseError::Kind::Syntax, lineno, 1,
                       "'dims' expects four non-negative integers");
    }
  }
  std::string extra;
  if (in >> extra) {
    throw ParseError(ParseError::Kind::Syntax, lineno, 1, "trailing text after dims");
  }
  for (long v : vals) {
    if (v < 0 || v > 10000) {
      throw ParseError(ParseError::Kind::Syntax, lineno, 1, "dimension out of range");
    }
  }
  Dims dims{static_cast<int>(vals[0]), static_cast<int>(vals[1]), static_cast<int>(vals[2]),
            static_cast<int>(vals[3])};
  if (dims.n < 1 || dims.p < 1) {
    throw ParseError(ParseError::Kind::DimensionMismatch, lineno, 1, "need n >= 1 and p >= 1");
  }
  return dims;
}

}  // namespace

SystemSpec parse_model(std::string_view text, std::string name) {
  std::optional<Dims> dims;
  std::vector<std::optional<Expr>> f;
  std::vector<std::optional<Expr>> h;

  int lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    std::string_view raw = text.substr(start, end - start);
    start = end + 1;
    ++lineno;

    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string_view line = trim(raw);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }

    if (!dims) {
      dims = parse_dims_line(line, lineno);
      f.resize(dims->n);
      h.resize(dims->p);
      continue;
    }

    const auto eq = raw.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(ParseError::Kind::Syntax, lineno, leading_ws(raw) + 1,
                       "expected '<f|h><index> = <expression>'");
    }
    const std::string_view label = trim(raw.substr(0, eq));
    const int label_col = leading_ws(raw) + 1;
    if (label.size() < 2 || (label[0] != 'f' && label[0] != 'h')) {
      throw ParseError(ParseError::Kind::Syntax, lineno, label_col,
                       "equation label must be f<i> or h<j>, got '" + std::string(label) + "'");
    }
    int index = 0;
    auto [ptr, ec] = std::from_chars(label.data() + 1, label.data() + label.size(), index);
    if (ec != std::errc() || ptr != label.data() + label.size()) {
      throw ParseError(ParseError::Kind::Syntax, lineno, label_col,
                       "bad equation label '" + std::string(label) + "'");
    }
    auto& target = label[0] == 'f' ? f : h;
    const int limit = label[0] == 'f' ? dims->n : dims->p;
    if (index < 1 || index > limit) {
      throw ParseError(ParseError::Kind::DimensionMismatch, lineno, label_col,
                       "'" + std::string(label) + "' exceeds declared dimension " +
                           std::to_string(limit));
    }
    if (target[index - 1]) {
      throw ParseError(ParseError::Kind::DimensionMismatch, lineno, label_col,
                       "'" + std::string(label) + "' defined twice");
    }
    const std::string_view rhs = raw.substr(eq + 1);
    target[index - 1] = parse_expression(rhs, *dims, lineno, static_cast<int>(eq) + 1);
    if (end == text.size()) break;
  }

  if (!dims) throw ParseError(ParseError::Kind::Syntax, 0, 0, "missing 'dims' line");

  std::vector<Expr> fs;
  std::vector<Expr> hs;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!f[i]) {
      throw ParseError(ParseError::Kind::DimensionMismatch, 0, 0,
                       "missing equation f" + std::to_string(i + 1));
    }
    fs.push_back(std::move(*f[i]));
  }
  for (std::size_t j = 0; j < h.size(); ++j) {
    if (!h[j]) {
      throw ParseError(ParseError::Kind::DimensionMismatch, 0, 0,
                       "missing equation h" + std::to_string(j + 1));
    }
    hs.push_back(std::move(*h[j]));
  }
  return SystemSpec(std::move(name), *dims, std::move(fs), std::move(hs));
}

SystemSpec load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str(), path.stem().string());
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

const Eigen::MatrixXd& xu_seed(const Dims& dims) {
  thread_local Eigen::MatrixXd seed;
  if (seed.rows() != dims.nz() || seed.cols() != dims.nxu()) {
    seed = Eigen::MatrixXd::Zero(dims.nz(), dims.nxu());
    seed.topRows(dims.nxu()).setIdentity();
  }
  return seed;
}

void check_length(const Eigen::VectorXd& z, const Dims& dims) {
  if (z.size() != dims.nz()) {
    throw DimensionError("point has " + std::to_string(z.size()) + " coordinates, model expects " +
                         std::to_string(dims.nz()));
  }
}

template <class F>
auto labelled(const char* prefix, std::size_t i, F&& fn) {
  try {
    return fn();
  } catch (const DomainError& e) {
    throw DomainError(prefix + std::to_string(i + 1), e.what());
  }
}

}  // namespace

Eigen::MatrixXd PointEval::AB() const {
  Eigen::MatrixXd out(A.rows(), A.cols() + B.cols());
  out << A, B;
  return out;
}

Eigen::VectorXd stack_point(const Dims& dims, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                            const Eigen::VectorXd& d) {
  if (x.size() != dims.n || u.size() != dims.q || d.size() != dims.m) {
    throw DimensionError("vector lengths do not match (n, q, m) = (" + std::to_string(dims.n) +
                         ", " + std::to_string(dims.q) + ", " + std::to_string(dims.m) + ")");
  }
  Eigen::VectorXd z(dims.nz());
  z << x, u, d;
  return z;
}

PointEval eval_point(const SystemSpec& sys, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                     const Eigen::VectorXd& d) {
  return eval_point(sys, stack_point(sys.dims(), x, u, d));
}

PointEval eval_point(const SystemSpec& sys, const Eigen::VectorXd& z) {
  const Dims& dims = sys.dims();
  check_length(z, dims);
  const auto& seed = xu_seed(dims);
  const std::span<const double> zs(z.data(), static_cast<std::size_t>(z.size()));

  PointEval pe;
  pe.x = z.head(dims.n);
  pe.u = z.segment(dims.n, dims.q);
  pe.d = z.tail(dims.m);
  pe.f_val.resize(dims.n);
  pe.h_val.resize(dims.p);
  pe.A.resize(dims.n, dims.n);
  pe.B.resize(dims.n, dims.q);
  pe.C.resize(dims.p, dims.n);
  pe.D.resize(dims.p, dims.q);

  Eigen::RowVectorXd grad(dims.nxu());
  for (int i = 0; i < dims.n; ++i) {
    pe.f_val[i] = labelled("f", i, [&] { return sys.f()[i].evaluate(zs, seed, grad); });
    pe.A.row(i) = grad.head(dims.n);
    pe.B.row(i) = grad.tail(dims.q);
  }
  for (int j = 0; j < dims.p; ++j) {
    pe.h_val[j] = labelled("h", j, [&] { return sys.h()[j].evaluate(zs, seed, grad); });
    pe.C.row(j) = grad.head(dims.n);
    pe.D.row(j) = grad.tail(dims.q);
  }
  return pe;
}

Eigen::VectorXd eval_f(const SystemSpec& sys, const Eigen::VectorXd& z) {
  check_length(z, sys.dims());
  const std::span<const double> zs(z.data(), static_cast<std::size_t>(z.size()));
  Eigen::VectorXd out(sys.dims().n);
  for (int i = 0; i < sys.dims().n; ++i)
    out[i] = labelled("f", i, [&] { return sys.f()[i].evaluate(zs); });
  return out;
}

Eigen::VectorXd eval_h(const SystemSpec& sys, const Eigen::VectorXd& z) {
  check_length(z, sys.dims());
  const std::span<const double> zs(z.data(), static_cast<std::size_t>(z.size()));
  Eigen::VectorXd out(sys.dims().p);
  for (int j = 0; j < sys.dims().p; ++j)
    out[j] = labelled("h", j, [&] { return sys.h()[j].evaluate(zs); });
  return out;
}

Eigen::VectorXd eval_f_seeded(const SystemSpec& sys, const Eigen::VectorXd& z,
                              const Eigen::MatrixXd& seed, Eigen::MatrixXd& jac) {
  const Dims& dims = sys.dims();
  check_length(z, dims);
  if (seed.rows() != dims.nz()) throw DimensionError("seed must have nz rows");
  const std::span<const double> zs(z.data(), static_cast<std::size_t>(z.size()));
  Eigen::VectorXd out(dims.n);
  jac.resize(dims.n, seed.cols());
  Eigen::RowVectorXd grad(seed.cols());
  for (int i = 0; i < dims.n; ++i) {
    out[i] = labelled("f", i, [&] { return sys.f()[i].evaluate(zs, seed, grad); });
    jac.row(i) = grad;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dependency structure

namespace {

void unite(std::vector<bool>& into, const std::vector<bool>& from) {
  for (std::size_t i = 0; i < into.size(); ++i) into[i] = into[i] || from[i];
}

}  // namespace

std::vector<bool> ct_jacobian_dependencies(const SystemSpec& sys) {
  const Dims& dims = sys.dims();
  std::vector<bool> deps(dims.nz(), false);
  for (const Expr& e : sys.f()) unite(deps, gradient_dependencies(e, dims));
  for (const Expr& e : sys.h()) unite(deps, gradient_dependencies(e, dims));
  return deps;
}

std::vector<bool> rk2_jacobian_dependencies(const SystemSpec& sys) {
  const Dims& dims = sys.dims();
  std::vector<bool> ab(dims.nz(), false);
  for (const Expr& e : sys.f()) unite(ab, gradient_dependencies(e, dims));
  std::vector<bool> deps = ct_jacobian_dependencies(sys);
  for (int j = 0; j < dims.n; ++j) {
    if (ab[j]) unite(deps, variables_used(sys.f()[j], dims));
  }
  return deps;
}

std::string coordinate_name(const Dims& dims, int slot) {
  if (slot < dims.n) return "x" + std::to_string(slot + 1);
  if (slot < dims.n + dims.q) return "u" + std::to_string(slot - dims.n + 1);
  return "d" + std::to_string(slot - dims.n - dims.q + 1);
}

}  // namespace ioss
