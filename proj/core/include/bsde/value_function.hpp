#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "bsde/model.hpp"

namespace bsde {

// Terminal condition Phi with its first two derivatives and a declared
// polynomial majorant |Phi(x)| <= growth_c (1 + |x|^growth_p).
struct TerminalFunction {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
  double growth_c = 1.0;
  double growth_p = 1.0;
};

TerminalFunction terminal_identity();
TerminalFunction terminal_square();
TerminalFunction terminal_sine();
// "identity", "square" or "sine"; throws ErrorKind::Configuration otherwise.
TerminalFunction terminal_by_name(const std::string& name);

// Generator f(t, x, y, z) of the backward equation.
using Driver = std::function<double(double t, double x, double y, double z)>;
Driver linear_driver(double beta, double gamma);

// dX = theta dt + eps sigma dW with driver f = beta y + gamma z.
struct LinearModelSpec {
  double sigma = 1.0;
  double beta = 0.0;
  double gamma = 0.0;
  TerminalFunction terminal = terminal_identity();
  Interval theta_interval{0.0, 2.0};
  double x0 = 0.0;
  double horizon = 1.0;

  ModelSpec forward_model() const;
  Driver driver() const;
};

// u(t, x, theta) solving the backward PDE at a fixed eps, with the theta-
// and x-derivatives the approximation needs and the eps -> 0 limit u0.
class ValueFunction {
 public:
  struct ValueAndSlope {
    double u = 0.0;
    double u_x = 0.0;
  };

  virtual ~ValueFunction() = default;

  virtual double epsilon() const = 0;
  virtual double horizon() const = 0;
  virtual double terminal(double x) const = 0;

  virtual double u(double t, double x, double theta) const = 0;
  virtual double u_x(double t, double x, double theta) const = 0;
  virtual double u_theta(double t, double x, double theta) const = 0;
  virtual double u_theta_x(double t, double x, double theta) const = 0;
  virtual double u_thetatheta(double t, double x, double theta) const = 0;

  virtual double u0(double t, double x, double theta) const = 0;
  virtual double u0_x(double t, double x, double theta) const = 0;
  virtual double u0_theta(double t, double x, double theta) const = 0;
  virtual double u0_theta_x(double t, double x, double theta) const = 0;

  virtual ValueAndSlope value_and_slope(double t, double x, double theta) const {
    return {u(t, x, theta), u_x(t, x, theta)};
  }
};

struct LinearDerivatives {
  double u_x = 0.0;
  double u_theta = 0.0;
  double u_theta_x = 0.0;
  double u_thetatheta = 0.0;
};

struct LimitValue {
  double u0 = 0.0;
  double u0_x = 0.0;
  double u0_theta = 0.0;
  double u0_theta_x = 0.0;
};

// u = e^{beta (T - t)} G(t, x, theta), G the Gaussian-kernel average of Phi
// centred at x + (theta + eps sigma gamma)(T - t) with variance
// eps^2 sigma^2 (T - t). Gauss-Hermite with 64 nodes, doubled until two
// successive rules agree to 1e-9 (cap 512). Returns Phi(x) at t = T.
double linear_u(const LinearModelSpec& spec, double epsilon, double t, double x, double theta);
LinearDerivatives linear_u_derivatives(const LinearModelSpec& spec, double epsilon, double t,
                                       double x, double theta);
// u0 = e^{beta (T - t)} Phi(x + theta (T - t)) and its derivatives.
LimitValue limit_u0(const LinearModelSpec& spec, double t, double x, double theta);

// u0(t, x) for a general model by characteristics: x forward from (t, x) to
// T, then y' = -f(s, x_s, y, 0) backward from Phi(x_T), both RK4.
double generic_limit_u0(const ModelSpec& model, const Driver& f, const TerminalFunction& phi,
                        double t, double x, double theta, double max_step = 1e-3);

class LinearValueFunction final : public ValueFunction {
 public:
  LinearValueFunction(LinearModelSpec spec, double epsilon);

  double epsilon() const override { return epsilon_; }
  double horizon() const override { return spec_.horizon; }
  double terminal(double x) const override { return spec_.terminal.value(x); }

  double u(double t, double x, double theta) const override;
  double u_x(double t, double x, double theta) const override;
  double u_theta(double t, double x, double theta) const override;
  double u_theta_x(double t, double x, double theta) const override;
  double u_thetatheta(double t, double x, double theta) const override;
  double u0(double t, double x, double theta) const override;
  double u0_x(double t, double x, double theta) const override;
  double u0_theta(double t, double x, double theta) const override;
  double u0_theta_x(double t, double x, double theta) const override;
  ValueAndSlope value_and_slope(double t, double x, double theta) const override;

  const LinearModelSpec& spec() const noexcept { return spec_; }

 private:
  LinearModelSpec spec_;
  double epsilon_;
};

// Limit-only value function for a general model; u0 accessors by
// characteristics and central differences. The eps > 0 accessors come from
// a PDE backend (see pde.hpp).
class CharacteristicLimit {
 public:
  CharacteristicLimit(ModelSpec model, Driver f, TerminalFunction phi);

  double u0(double t, double x, double theta) const;
  double u0_x(double t, double x, double theta) const;
  double u0_theta(double t, double x, double theta) const;
  double u0_theta_x(double t, double x, double theta) const;

 private:
  ModelSpec model_;
  Driver f_;
  TerminalFunction phi_;
};

}  // namespace bsde
