#pragma once

// Reverse-mode gradients of the batch MSE through teacher-forced tapes.

#include <span>
#include <string>
#include <vector>

#include "rdson/network.hpp"

namespace rdson {

template <typename Scalar>
using Gradients = NetParams<Scalar>;

template <typename Scalar>
struct BpttResult {
  Scalar loss = 0;
  Gradients<Scalar> grads;
};

/// Loss is (1 / (m n k)) * sum of squared residuals over every row, step and
/// output component. `tapes[r]` must come from forward_teacher_forced and
/// `targets[r]` holds that row's n target vectors.
template <typename Scalar>
BpttResult<Scalar> bptt(const StackedLstm<Scalar>& net, std::span<const ForwardTape<Scalar>> tapes,
                        std::span<const std::vector<Vector<Scalar>>> targets) {
  const auto& cfg = net.config();
  const auto& P = net.params();
  if (tapes.size() != targets.size() || tapes.empty()) {
    throw ShapeError("bptt: " + std::to_string(tapes.size()) + " tapes vs " + std::to_string(targets.size()) +
                     " target rows");
  }
  const std::size_t rows = tapes.size();
  const std::size_t n = static_cast<std::size_t>(cfg.n);
  const Scalar scale = Scalar(1) / static_cast<Scalar>(rows * n * static_cast<std::size_t>(cfg.k));
  const std::size_t layers = static_cast<std::size_t>(cfg.ell);

  BpttResult<Scalar> out{Scalar(0), Gradients<Scalar>::zeros(cfg)};
  auto& G = out.grads;

  for (std::size_t r = 0; r < rows; ++r) {
    const auto& tape = tapes[r];
    const auto& y = targets[r];
    if (tape.mode != ForwardMode::TeacherForced) {
      throw ShapeError("bptt: tape was not produced by the teacher-forced pass");
    }
    const std::size_t T = tape.steps.size();
    const std::size_t first = static_cast<std::size_t>(tape.first_output_step);
    if (T != first + n || y.size() != n) {
      throw ShapeError("bptt: tape has " + std::to_string(T - std::min(T, first)) + " outputs, targets " +
                       std::to_string(y.size()) + ", expected " + std::to_string(n));
    }

    std::vector<Vector<Scalar>> dh_next(layers, Vector<Scalar>::Zero(cfg.hidden));
    std::vector<Vector<Scalar>> dc_next(layers, Vector<Scalar>::Zero(cfg.hidden));

    for (std::size_t t = T; t-- > 0;) {
      Vector<Scalar> dh_from_above = Vector<Scalar>::Zero(cfg.hidden);
      if (t >= first) {
        const auto& h_top = tape.steps[t][layers - 1].h;
        const auto& target = y[t - first];
        if (target.size() != cfg.k) throw ShapeError("bptt: target width != k");
        const Vector<Scalar> pred = net.dense(h_top);
        const Vector<Scalar> resid = pred - target;
        out.loss += scale * resid.squaredNorm();
        const Vector<Scalar> dy = Scalar(2) * scale * resid;
        G.dense.W_d.noalias() += dy * h_top.transpose();
        G.dense.b_d += dy;
        dh_from_above.noalias() = P.dense.W_d.transpose() * dy;
      }
      for (std::size_t l = layers; l-- > 0;) {
        const auto& s = tape.steps[t][l];
        const auto& p = P.layers[l];
        auto& g = G.layers[l];

        const Vector<Scalar> dh = dh_next[l] + dh_from_above;
        const Vector<Scalar> d_o = dh.cwiseProduct(s.tanh_c);
        const Vector<Scalar> dc =
            dc_next[l] +
            dh.cwiseProduct(s.o).cwiseProduct(Vector<Scalar>::Ones(s.tanh_c.size()) - s.tanh_c.cwiseAbs2());
        const Vector<Scalar> d_f = dc.cwiseProduct(s.c_prev);
        const Vector<Scalar> d_i = dc.cwiseProduct(s.candidate);
        const Vector<Scalar> d_g = dc.cwiseProduct(s.i);

        const auto one = [](const Vector<Scalar>& v) { return Vector<Scalar>::Ones(v.size()); };
        const Vector<Scalar> a_i = d_i.cwiseProduct(s.i).cwiseProduct(one(s.i) - s.i);
        const Vector<Scalar> a_f = d_f.cwiseProduct(s.f).cwiseProduct(one(s.f) - s.f);
        const Vector<Scalar> a_o = d_o.cwiseProduct(s.o).cwiseProduct(one(s.o) - s.o);
        const Vector<Scalar> a_g = d_g.cwiseProduct(one(s.candidate) - s.candidate.cwiseAbs2());

        g.W_i.noalias() += a_i * s.v.transpose();
        g.W_f.noalias() += a_f * s.v.transpose();
        g.W_o.noalias() += a_o * s.v.transpose();
        g.W_c.noalias() += a_g * s.v.transpose();
        g.b_i += a_i;
        g.b_f += a_f;
        g.b_o += a_o;
        g.b_c += a_g;

        Vector<Scalar> dv = p.W_i.transpose() * a_i;
        dv.noalias() += p.W_f.transpose() * a_f;
        dv.noalias() += p.W_o.transpose() * a_o;
        dv.noalias() += p.W_c.transpose() * a_g;

        const auto in = dv.size() - cfg.hidden;
        dh_next[l] = dv.tail(cfg.hidden);
        dc_next[l] = dc.cwiseProduct(s.f);
        dh_from_above = dv.head(in);
        if (l > 0 && in != cfg.hidden) throw ShapeError("bptt: inner layer width mismatch");
      }
    }
    if (cfg.learn_initial_state) {
      for (std::size_t l = 0; l < layers; ++l) G.layers[l].c_0 += dc_next[l];
    }
  }
  return out;
}

}  // namespace rdson
