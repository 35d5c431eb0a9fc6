#include <cmath>
#include <numbers>
#include <sstream>

#include "csplit/error.hpp"
#include "csplit/harness.hpp"

namespace csplit::harness {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kFourPi2 = kTwoPi * kTwoPi;

}  // namespace

const std::vector<ProblemInfo>& problems() {
  static const std::vector<ProblemInfo> list{
      {"heat1d-sin", 1, 2e-3, true,
       "u_t = u_xx + sin(2 pi x), u = 0 on the boundary, u0 = sin(2 pi x)"},
      {"heat1d-x2sin", 1, 2e-3, true,
       "u_t = u_xx + x^2 sin(2 pi x), u = 0 on the boundary, u0 = sin(2 pi x)"},
      {"heat1d-cos", 1, 2e-3, true,
       "u_t = u_xx + cos(2 pi x), u = 0 on the boundary, u0 = sin(2 pi x)"},
      {"heat2d-expy7", 2, 1e-2, true,
       "u_t = Laplace u + e^x y^7 + 1, u = x + y on the boundary, u0 = x + y"},
      {"fisher-kpp", 2, 1e-2, false,
       "u_t = Laplace u + u (1 - u), u = 1/2 on the boundary, u0 = sin(2 pi x) sin(2 pi y) + 1/2"},
  };
  return list;
}

const ProblemInfo& problem_info(const std::string& id) {
  for (const auto& p : problems()) {
    if (p.id == id) return p;
  }
  std::ostringstream msg;
  msg << "unknown problem '" << id << "'; valid:";
  for (const auto& p : problems()) msg << ' ' << p.id;
  throw ConfigError(msg.str());
}

Problem build_problem(const std::string& id, const ProblemOptions& options) {
  const ProblemInfo& info = problem_info(id);
  const double dx = options.dx > 0.0 ? options.dx : info.default_dx;
  auto mesh = std::make_shared<const Mesh>(Mesh::from_spacing(info.dim, dx));

  ScalarFunction f, df, b, u0;
  bool logistic = false;
  if (id == "heat1d-sin") {
    f = [](double x, double) { return std::sin(kTwoPi * x); };
    df = [](double x, double) { return -kFourPi2 * std::sin(kTwoPi * x); };
  } else if (id == "heat1d-x2sin") {
    f = [](double x, double) { return x * x * std::sin(kTwoPi * x); };
    df = [](double x, double) {
      return (2.0 - kFourPi2 * x * x) * std::sin(kTwoPi * x) +
             4.0 * kTwoPi * x * std::cos(kTwoPi * x);
    };
  } else if (id == "heat1d-cos") {
    f = [](double x, double) { return std::cos(kTwoPi * x); };
    df = [](double x, double) { return -kFourPi2 * std::cos(kTwoPi * x); };
  } else if (id == "heat2d-expy7") {
    f = [](double x, double y) { return std::exp(x) * std::pow(y, 7) + 1.0; };
    df = [](double x, double y) {
      return std::exp(x) * (std::pow(y, 7) + 42.0 * std::pow(y, 5));
    };
    b = [](double x, double y) { return x + y; };
    u0 = b;
  } else {
    logistic = true;
    b = [](double, double) { return 0.5; };
    u0 = [](double x, double y) { return std::sin(kTwoPi * x) * std::sin(kTwoPi * y) + 0.5; };
  }
  if (info.dim == 1) {
    b = [](double, double) { return 0.0; };
    u0 = [](double x, double) { return std::sin(kTwoPi * x); };
  }

  BoundarySpec boundary = BoundarySpec::dirichlet(b);
  auto op = std::make_shared<const DiscreteOperator>(
      assemble_operator(mesh, DiffusionCoefficients::laplacian(), boundary));

  std::optional<SourceTerm> source;
  if (options.zero_source) {
    source = SourceTerm::independent(
        mesh, [](double, double) { return 0.0; }, [](double, double) { return 0.0; });
  } else if (logistic) {
    source = SourceTerm::logistic(1.0);
  } else {
    source = SourceTerm::independent(mesh, f, df);
  }
  ProblemInfo effective = info;
  if (options.zero_source) effective.independent_source = true;
  return Problem{effective, mesh, op, std::move(*source), std::move(boundary),
                 Field::sample(mesh, u0)};
}

SplittingContext make_context(const Problem& problem, const ContextOptions& options) {
  return SplittingContext(problem.op, problem.source, problem.boundary, options);
}

}  // namespace csplit::harness
