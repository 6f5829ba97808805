#pragma once

// Test-only reference evaluations. Plain loops over std::vector, written from
// the cell equations directly; they share nothing with the library code.

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;  // row-major, Mat[r][c]

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Vec affine(const Mat& w, const Vec& v, const Vec& b) {
  Vec out(w.size());
  for (std::size_t r = 0; r < w.size(); ++r) {
    double s = b[r];
    for (std::size_t c = 0; c < v.size(); ++c) s += w[r][c] * v[c];
    out[r] = s;
  }
  return out;
}

struct Rnn {
  Mat W_i, W_c, W_o;
  Vec b_i, b_o;
};

/// i = W_i x + W_c c_prev + b_i; c = tanh(i); o = W_o c + b_o; z = o.
inline std::pair<Vec, Vec> rnn_step(const Rnn& p, const Vec& x, const Vec& c_prev) {
  const std::size_t h = p.W_c.size();
  Vec c(h);
  for (std::size_t r = 0; r < h; ++r) {
    double s = p.b_i[r];
    for (std::size_t j = 0; j < x.size(); ++j) s += p.W_i[r][j] * x[j];
    for (std::size_t j = 0; j < h; ++j) s += p.W_c[r][j] * c_prev[j];
    c[r] = std::tanh(s);
  }
  Vec z = affine(p.W_o, c, p.b_o);
  return {z, c};
}

struct Lstm {
  Mat W_i, W_o, W_f, W_c;
  Vec b_i, b_o, b_f, b_c;
};

inline std::pair<Vec, Vec> lstm_step(const Lstm& p, const Vec& x, const Vec& h_prev, const Vec& c_prev) {
  Vec v = x;
  v.insert(v.end(), h_prev.begin(), h_prev.end());
  const Vec ai = affine(p.W_i, v, p.b_i);
  const Vec af = affine(p.W_f, v, p.b_f);
  const Vec ao = affine(p.W_o, v, p.b_o);
  const Vec ac = affine(p.W_c, v, p.b_c);
  Vec h(c_prev.size()), c(c_prev.size());
  for (std::size_t r = 0; r < c.size(); ++r) {
    const double i = logistic(ai[r]), f = logistic(af[r]), o = logistic(ao[r]), g = std::tanh(ac[r]);
    c[r] = f * c_prev[r] + i * g;
    h[r] = o * std::tanh(c[r]);
  }
  return {h, c};
}

/// Central finite difference of f at x along coordinate i.
inline double central_difference(const std::function<double(const Vec&)>& f, Vec x, std::size_t i,
                                 double step) {
  const double x0 = x[i];
  x[i] = x0 + step;
  const double up = f(x);
  x[i] = x0 - step;
  const double down = f(x);
  return (up - down) / (2.0 * step);
}

/// Empirical q-quantile by the linear-interpolation rule on sorted data:
/// position (N-1) q between closest ranks.
inline double quantile_sorted(const Vec& sorted, double q) {
  const double pos = (static_cast<double>(sorted.size()) - 1.0) * q;
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace oracle
