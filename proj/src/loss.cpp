#include "uar/loss.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace uar {

double LossFunction::weight(double x) const {
  if (std::abs(x) < 1e-300) return psi_prime(0.0);
  return psi(x) / x;
}

LossFunction huber_loss(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw std::domain_error("Huber threshold c must be positive");
  LossFunction loss;
  std::ostringstream name;
  name << "huber(" << c << ")";
  loss.name = name.str();
  loss.rho = [c](double x) {
    const double a = std::abs(x);
    return a <= c ? 0.5 * x * x : c * a - 0.5 * c * c;
  };
  loss.psi = [c](double x) { return std::clamp(x, -c, c); };
  loss.psi_prime = [c](double x) { return std::abs(x) <= c ? 1.0 : 0.0; };
  loss.knots = {c};
  return loss;
}

LossFunction smoothed_huber_loss(double c, double fraction) {
  if (!(c > 0.0) || !std::isfinite(c)) throw std::domain_error("Huber threshold c must be positive");
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::domain_error("smoothing fraction must lie in (0, 1)");
  const double delta = fraction * c;
  const double a = c - delta;
  const double b = c + delta;
  // rho at the end of the blend, z = 2 delta
  const double rho_b = 0.5 * a * a + 2.0 * a * delta + 2.0 * delta * delta - 2.0 * delta * delta / 3.0;
  LossFunction loss;
  std::ostringstream name;
  name << "smooth-huber(" << c << ")";
  loss.name = name.str();
  loss.rho = [=](double x) {
    const double ax = std::abs(x);
    if (ax <= a) return 0.5 * x * x;
    if (ax <= b) {
      const double z = ax - a;
      return 0.5 * a * a + a * z + 0.5 * z * z - z * z * z / (12.0 * delta);
    }
    return rho_b + c * (ax - b);
  };
  loss.psi = [=](double x) {
    const double ax = std::abs(x);
    const double sign = x < 0.0 ? -1.0 : 1.0;
    if (ax <= a) return x;
    if (ax <= b) {
      const double z = ax - a;
      return sign * (a + z - z * z / (4.0 * delta));
    }
    return sign * c;
  };
  loss.psi_prime = [=](double x) {
    const double ax = std::abs(x);
    if (ax <= a) return 1.0;
    if (ax <= b) return 1.0 - (ax - a) / (2.0 * delta);
    return 0.0;
  };
  loss.lipschitz_k = 1.0 / (2.0 * delta);
  loss.knots = {a, b};
  return loss;
}

LossFunction quadratic_loss() {
  LossFunction loss;
  loss.name = "quadratic";
  loss.rho = [](double x) { return 0.5 * x * x; };
  loss.psi = [](double x) { return x; };
  loss.psi_prime = [](double) { return 1.0; };
  loss.lipschitz_k = 0.0;
  return loss;
}

LossFunction parse_loss(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const double c = colon == std::string::npos ? 5.0 : std::stod(text.substr(colon + 1));
  if (kind == "huber" || kind == "M" || kind == "m") return huber_loss(c);
  if (kind == "smooth-huber") return smoothed_huber_loss(c);
  if (kind == "quadratic" || kind == "ls" || kind == "LS") return quadratic_loss();
  throw std::invalid_argument("unknown loss '" + text + "'");
}

}  // namespace uar
