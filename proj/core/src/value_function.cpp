#include "bsde/value_function.hpp"

#include <array>
#include <cmath>

#include "bsde/errors.hpp"
#include "bsde/numerics.hpp"

namespace bsde {

TerminalFunction terminal_identity() {
  return {"identity", [](double x) { return x; }, [](double) { return 1.0; },
          [](double) { return 0.0; }, 1.0, 1.0};
}

TerminalFunction terminal_square() {
  return {"square", [](double x) { return x * x; }, [](double x) { return 2.0 * x; },
          [](double) { return 2.0; }, 1.0, 2.0};
}

TerminalFunction terminal_sine() {
  return {"sine", [](double x) { return std::sin(x); }, [](double x) { return std::cos(x); },
          [](double x) { return -std::sin(x); }, 1.0, 0.0};
}

TerminalFunction terminal_by_name(const std::string& name) {
  if (name == "identity") return terminal_identity();
  if (name == "square") return terminal_square();
  if (name == "sine") return terminal_sine();
  throw Error(ErrorKind::Configuration, "unknown terminal function '" + name + "'");
}

Driver linear_driver(double beta, double gamma) {
  return [beta, gamma](double, double, double y, double z) { return beta * y + gamma * z; };
}

ModelSpec LinearModelSpec::forward_model() const {
  return constant_drift_model(sigma, theta_interval, x0, horizon);
}

Driver LinearModelSpec::driver() const { return linear_driver(beta, gamma); }

namespace {

constexpr std::size_t kFirstRule = 64;
constexpr std::size_t kMaxRule = 512;
constexpr double kRuleAgreement = 1e-9;

// E[g_i(m + s Z)], Z ~ N(0, 1), for up to N integrands sharing the nodes.
template <std::size_t N>
std::array<double, N> gaussian_average(const std::array<const std::function<double(double)>*, N>& g,
                                       double m, double s) {
  std::array<double, N> result{};
  if (s == 0.0) {
    for (std::size_t i = 0; i < N; ++i) result[i] = (*g[i])(m);
    return result;
  }
  auto apply = [&](std::size_t n) {
    const auto& rule = gauss_hermite(n);
    std::array<double, N> acc{};
    for (std::size_t j = 0; j < n; ++j) {
      const double w = rule.weights[j];
      if (w == 0.0) continue;
      const double z = m + s * rule.nodes[j];
      for (std::size_t i = 0; i < N; ++i) acc[i] += w * (*g[i])(z);
    }
    return acc;
  };
  auto prev = apply(kFirstRule);
  for (std::size_t n = 2 * kFirstRule; n <= kMaxRule; n *= 2) {
    const auto cur = apply(n);
    bool agree = true;
    for (std::size_t i = 0; i < N; ++i) {
      if (!(std::abs(cur[i] - prev[i]) <= kRuleAgreement * std::max(1.0, std::abs(cur[i])))) {
        agree = false;
      }
    }
    prev = cur;
    if (agree) break;
  }
  for (double v : prev) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::Evaluation, "terminal function is not finite under the kernel");
    }
  }
  return prev;
}

void check_time(double t, double horizon) {
  if (!(t >= 0.0 && t <= horizon)) {
    throw Error(ErrorKind::Domain, "time " + std::to_string(t) + " outside [0, T]");
  }
}

struct KernelFrame {
  double tau;
  double discount;
  double mean;
  double spread;
};

KernelFrame frame(const LinearModelSpec& spec, double epsilon, double t, double x, double theta) {
  check_time(t, spec.horizon);
  const double tau = spec.horizon - t;
  return {tau, std::exp(spec.beta * tau),
          x + (theta + epsilon * spec.sigma * spec.gamma) * tau,
          epsilon * spec.sigma * std::sqrt(tau)};
}

}  // namespace

double linear_u(const LinearModelSpec& spec, double epsilon, double t, double x, double theta) {
  const auto f = frame(spec, epsilon, t, x, theta);
  if (f.tau == 0.0) return spec.terminal.value(x);
  return f.discount * gaussian_average<1>({&spec.terminal.value}, f.mean, f.spread)[0];
}

LinearDerivatives linear_u_derivatives(const LinearModelSpec& spec, double epsilon, double t,
                                       double x, double theta) {
  const auto f = frame(spec, epsilon, t, x, theta);
  if (f.tau == 0.0) return {spec.terminal.d1(x), 0.0, 0.0, 0.0};
  const auto g = gaussian_average<2>({&spec.terminal.d1, &spec.terminal.d2}, f.mean, f.spread);
  LinearDerivatives d;
  d.u_x = f.discount * g[0];
  d.u_theta = f.tau * f.discount * g[0];
  d.u_theta_x = f.tau * f.discount * g[1];
  d.u_thetatheta = f.tau * f.tau * f.discount * g[1];
  return d;
}

LimitValue limit_u0(const LinearModelSpec& spec, double t, double x, double theta) {
  check_time(t, spec.horizon);
  const double tau = spec.horizon - t;
  const double discount = std::exp(spec.beta * tau);
  const double arg = x + theta * tau;
  const double d1 = spec.terminal.d1(arg);
  return {discount * spec.terminal.value(arg), discount * d1, tau * discount * d1,
          tau * discount * spec.terminal.d2(arg)};
}

double generic_limit_u0(const ModelSpec& model, const Driver& f, const TerminalFunction& phi,
                        double t, double x, double theta, double max_step) {
  const double T = model.horizon;
  check_time(t, T);
  if (t == T) return phi.value(x);
  const auto n = static_cast<std::size_t>(std::max(16.0, std::ceil((T - t) / max_step)));
  const double h = (T - t) / static_cast<double>(n);

  // Characteristic on the half-step lattice so the backward sweep sees x at
  // every RK4 stage.
  std::size_t bad = 0;
  const auto xs = rk4_scalar([&](double s, double v) { return model.drift(theta, s, v); }, t, x,
                             0.5 * h, 2 * n, bad);
  if (bad <= 2 * n) {
    throw Error(ErrorKind::IntegrationDiverged, "characteristic blew up", bad);
  }
  double y = phi.value(xs[2 * n]);
  for (std::size_t k = n; k-- > 0;) {
    const double s1 = t + static_cast<double>(k + 1) * h;
    const double s0 = s1 - h;
    const double sm = s1 - 0.5 * h;
    // Integrate y backward in time: dy/ds = -f  =>  y(s0) = y(s1) + int f ds.
    const double k1 = f(s1, xs[2 * k + 2], y, 0.0);
    const double k2 = f(sm, xs[2 * k + 1], y + 0.5 * h * k1, 0.0);
    const double k3 = f(sm, xs[2 * k + 1], y + 0.5 * h * k2, 0.0);
    const double k4 = f(s0, xs[2 * k], y + h * k3, 0.0);
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(y)) {
      throw Error(ErrorKind::IntegrationDiverged, "limit value blew up", k);
    }
  }
  return y;
}

LinearValueFunction::LinearValueFunction(LinearModelSpec spec, double epsilon)
    : spec_(std::move(spec)), epsilon_(epsilon) {
  if (!(epsilon >= 0.0)) throw Error(ErrorKind::Configuration, "epsilon must be >= 0");
}

double LinearValueFunction::u(double t, double x, double theta) const {
  return linear_u(spec_, epsilon_, t, x, theta);
}
double LinearValueFunction::u_x(double t, double x, double theta) const {
  return linear_u_derivatives(spec_, epsilon_, t, x, theta).u_x;
}
double LinearValueFunction::u_theta(double t, double x, double theta) const {
  return linear_u_derivatives(spec_, epsilon_, t, x, theta).u_theta;
}
double LinearValueFunction::u_theta_x(double t, double x, double theta) const {
  return linear_u_derivatives(spec_, epsilon_, t, x, theta).u_theta_x;
}
double LinearValueFunction::u_thetatheta(double t, double x, double theta) const {
  return linear_u_derivatives(spec_, epsilon_, t, x, theta).u_thetatheta;
}
double LinearValueFunction::u0(double t, double x, double theta) const {
  return limit_u0(spec_, t, x, theta).u0;
}
double LinearValueFunction::u0_x(double t, double x, double theta) const {
  return limit_u0(spec_, t, x, theta).u0_x;
}
double LinearValueFunction::u0_theta(double t, double x, double theta) const {
  return limit_u0(spec_, t, x, theta).u0_theta;
}
double LinearValueFunction::u0_theta_x(double t, double x, double theta) const {
  return limit_u0(spec_, t, x, theta).u0_theta_x;
}

ValueFunction::ValueAndSlope LinearValueFunction::value_and_slope(double t, double x,
                                                                  double theta) const {
  const auto f = frame(spec_, epsilon_, t, x, theta);
  if (f.tau == 0.0) return {spec_.terminal.value(x), spec_.terminal.d1(x)};
  const auto g =
      gaussian_average<2>({&spec_.terminal.value, &spec_.terminal.d1}, f.mean, f.spread);
  return {f.discount * g[0], f.discount * g[1]};
}

CharacteristicLimit::CharacteristicLimit(ModelSpec model, Driver f, TerminalFunction phi)
    : model_(std::move(model)), f_(std::move(f)), phi_(std::move(phi)) {}

namespace {
constexpr double kLimitStep = 1e-4;
}

double CharacteristicLimit::u0(double t, double x, double theta) const {
  return generic_limit_u0(model_, f_, phi_, t, x, theta);
}

double CharacteristicLimit::u0_x(double t, double x, double theta) const {
  const double h = kLimitStep * std::max(1.0, std::abs(x));
  return (u0(t, x + h, theta) - u0(t, x - h, theta)) / (2.0 * h);
}

double CharacteristicLimit::u0_theta(double t, double x, double theta) const {
  const double h = kLimitStep * std::max(1.0, std::abs(theta));
  return (u0(t, x, theta + h) - u0(t, x, theta - h)) / (2.0 * h);
}

double CharacteristicLimit::u0_theta_x(double t, double x, double theta) const {
  const double h = kLimitStep * std::max(1.0, std::abs(x));
  return (u0_theta(t, x + h, theta) - u0_theta(t, x - h, theta)) / (2.0 * h);
}

}  // namespace bsde
