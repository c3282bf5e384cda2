#include "ioss/builtins.hpp"

#include <array>

#include "ioss/error.hpp"

namespace ioss {

namespace {

struct Builtin {
  std::string_view name;
  std::string_view source;
};

// Gas-phase reaction 2A <-> B with k1 = 0.16, k2 = 0.0064; y is the total
// pressure plus an additive input.
constexpr std::string_view kReactor = R"(dims 2 3 0 1
f1 = -2*0.16*x1^2 + 2*0.0064*x2 + u1
f2 = 0.16*x1^2 - 0.0064*x2 + u2
h1 = x1 + x2 + u3
)";

constexpr std::string_view kScalarLinear = R"(dims 1 1 0 1
f1 = -x1 + u1
h1 = x1
)";

constexpr std::string_view kZero = R"(dims 1 1 0 1
f1 = 0
h1 = 0
)";

// A(x) = 1 + cos(x) vanishes at x = pi, so A is not uniformly bounded away
// from zero.
constexpr std::string_view kSine = R"(dims 1 0 0 1
f1 = x1 + sin(x1)
h1 = x1
)";

constexpr std::array<Builtin, 4> kBuiltins{{{"reactor", kReactor},
                                             {"scalar_linear", kScalarLinear},
                                             {"zero", kZero},
                                             {"sine", kSine}}};

}  // namespace

std::vector<std::string> builtin_names() {
  std::vector<std::string> out;
  for (const Builtin& b : kBuiltins) out.emplace_back(b.name);
  return out;
}

std::string_view builtin_source(std::string_view name) {
  for (const Builtin& b : kBuiltins)
    if (b.name == name) return b.source;
  throw Error("unknown builtin model '" + std::string(name) +
              "' (known: reactor, scalar_linear, zero, sine)");
}

SystemSpec builtin_model(std::string_view name) {
  return parse_model(builtin_source(name), std::string(name));
}

GridSpec builtin_grid(std::string_view name, std::uint64_t count) {
  const SystemSpec sys = builtin_model(name);
  const Dims& d = sys.dims();
  std::vector<Axis> axes;
  if (name == "reactor") {
    for (int i = 0; i < d.n; ++i) axes.push_back({0.1, 0.5, count});
    for (int i = 0; i < d.q + d.m; ++i) axes.push_back({-0.1, 0.1, count});
  } else {
    for (int i = 0; i < d.nz(); ++i) axes.push_back({-1.0, 1.0, count});
  }
  return GridSpec(d, std::move(axes));
}

}  // namespace ioss
