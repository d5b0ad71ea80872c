#include "brwlab/fit.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

namespace brwlab {

FitResult fit_loglog(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw std::invalid_argument("insufficient points");
  std::set<double> distinct;
  std::vector<double> xs, ys;
  for (const auto& [n, y] : points) {
    if (!(n > 0.0) || !(y > 0.0))
      throw std::invalid_argument("fit_loglog: n and y must be positive");
    distinct.insert(n);
    xs.push_back(std::log(n));
    ys.push_back(std::log(y));
  }
  if (distinct.size() != points.size())
    throw std::invalid_argument("fit_loglog: n values must be distinct");

  const double m = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  FitResult fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
    sse += e * e;
  }
  fit.stderr_slope = std::sqrt(std::max(0.0, sse / (m - 2.0)) / sxx);
  // A constant series is fit perfectly by a zero slope.
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  return fit;
}

}  // namespace brwlab
