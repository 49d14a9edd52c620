#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "satnoma/neural.hpp"
#include "satnoma/rng.hpp"

namespace satnoma {

inline double gradcheck_rel_err(double analytic, double numeric) {
  return std::fabs(analytic - numeric) /
         std::max({1.0, std::fabs(analytic), std::fabs(numeric)});
}

struct GradCheckResult {
  double max_rel_err = 0.0;
  int checked = 0;
};

// Verifies the exact reverse-mode gradients of the scalar readout
// L = c . net(x) against central finite differences, for every weight, every
// bias, and every input component. `c` and `x` are drawn from `rng`, so a
// fixed seed gives a deterministic check.
inline GradCheckResult gradcheck_net(DenseNet net, Rng& rng, double h = 1e-5) {
  const int in = net.input_dim();
  const int out = net.output_dim();
  std::vector<double> x(in), c(out);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  for (double& v : c) v = rng.uniform(-1.0, 1.0);

  const auto loss = [&]() {
    const std::vector<double> y = forward(net, x);
    double acc = 0.0;
    for (int i = 0; i < out; ++i) acc += c[i] * y[i];
    return acc;
  };

  FwdCache cache;
  forward_cached(net, x, cache);
  NetGrads grads(net);
  std::vector<double> xgrad;
  backward(net, cache, c, &grads, &xgrad);

  GradCheckResult r;
  const auto check = [&](double analytic, double* slot) {
    const double saved = *slot;
    *slot = saved + h;
    const double lp = loss();
    *slot = saved - h;
    const double lm = loss();
    *slot = saved;
    r.max_rel_err =
        std::max(r.max_rel_err, gradcheck_rel_err(analytic, (lp - lm) / (2.0 * h)));
    ++r.checked;
  };

  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    for (std::size_t i = 0; i < net.layers[l].w.size(); ++i)
      check(grads.dw[l][i], &net.layers[l].w[i]);
    for (std::size_t i = 0; i < net.layers[l].b.size(); ++i)
      check(grads.db[l][i], &net.layers[l].b[i]);
  }
  for (int i = 0; i < in; ++i) check(xgrad[i], &x[i]);
  return r;
}

}  // namespace satnoma
