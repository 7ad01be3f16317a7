#include "vgforge/model/tape.hpp"

#include <cmath>
#include <stdexcept>

#include "vgforge/error.hpp"

namespace vgforge::model {

namespace {

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluA = 0.044715;

void require(bool cond, const char* what) {
  if (!cond) throw InvalidParameter(what);
}

}  // namespace

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    out.row(i) = (logits.row(i).array() - mx).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

Var Tape::push(Matrix value, bool needs_grad, std::function<void(Tape&, const Matrix&)> back) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  if (needs_grad) n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size() - 1)};
}

void Tape::accumulate(Var v, const Matrix& g) {
  Node& n = nodes_[static_cast<std::size_t>(v.id)];
  if (!n.needs_grad) return;
  if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  n.grad += g;
}

Var Tape::constant(Matrix value) { return push(std::move(value), false, nullptr); }

Var Tape::param(const Matrix& value, Matrix* grad_sink) {
  Var v = push(value, grad_sink != nullptr, [](Tape&, const Matrix&) {});
  nodes_.back().sink = grad_sink;
  return v;
}

void Tape::backward(Var loss) {
  require(value(loss).size() == 1, "backward: loss must be 1x1");
  for (auto& n : nodes_) n.grad.resize(0, 0);
  accumulate(loss, Matrix::Ones(1, 1));
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.needs_grad || n.grad.size() == 0) continue;
    if (n.sink) *n.sink += n.grad;
    if (n.back) {
      const Matrix g = n.grad;
      n.back(*this, g);
    }
  }
}

Var Tape::matmul(Var a, Var b) {
  require(value(a).cols() == value(b).rows(), "matmul: inner dimensions differ");
  return push(value(a) * value(b), needs(a) || needs(b), [a, b](Tape& t, const Matrix& g) {
    if (t.needs(a)) t.accumulate(a, g * t.value(b).transpose());
    if (t.needs(b)) t.accumulate(b, t.value(a).transpose() * g);
  });
}

Var Tape::add(Var a, Var b) {
  require(value(a).rows() == value(b).rows() && value(a).cols() == value(b).cols(), "add: shapes differ");
  return push(value(a) + value(b), needs(a) || needs(b), [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var Tape::add_row(Var a, Var r) {
  require(value(r).rows() == 1 && value(r).cols() == value(a).cols(), "add_row: row shape mismatch");
  Matrix out = value(a);
  out.rowwise() += value(r).row(0);
  return push(std::move(out), needs(a) || needs(r), [a, r](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    if (t.needs(r)) t.accumulate(r, g.colwise().sum());
  });
}

Var Tape::scale(Var a, double s) {
  return push(value(a) * s, needs(a), [a, s](Tape& t, const Matrix& g) { t.accumulate(a, g * s); });
}

Var Tape::gelu(Var a) {
  const Matrix& x = value(a);
  Matrix out(x.rows(), x.cols());
  Matrix dydx(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = x.data()[i];
    const double th = std::tanh(kGeluC * (v + kGeluA * v * v * v));
    out.data()[i] = 0.5 * v * (1.0 + th);
    dydx.data()[i] = 0.5 * (1.0 + th) + 0.5 * v * (1.0 - th * th) * kGeluC * (1.0 + 3.0 * kGeluA * v * v);
  }
  return push(std::move(out), needs(a),
              [a, dydx = std::move(dydx)](Tape& t, const Matrix& g) { t.accumulate(a, g.cwiseProduct(dydx)); });
}

Var Tape::layer_norm(Var x, Var gamma, Var beta, double eps) {
  const Matrix& in = value(x);
  const auto m = in.cols();
  require(value(gamma).rows() == 1 && value(gamma).cols() == m && value(beta).rows() == 1 && value(beta).cols() == m,
          "layer_norm: gain/bias shape mismatch");
  Matrix xhat(in.rows(), m);
  Eigen::VectorXd inv_std(in.rows());
  for (Eigen::Index i = 0; i < in.rows(); ++i) {
    const double mean = in.row(i).mean();
    const double var = (in.row(i).array() - mean).square().mean();
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    xhat.row(i) = (in.row(i).array() - mean) * inv_std[i];
  }
  Matrix out = xhat.array().rowwise() * value(gamma).row(0).array();
  out.rowwise() += value(beta).row(0);
  return push(std::move(out), needs(x) || needs(gamma) || needs(beta),
              [x, gamma, beta, xhat = std::move(xhat), inv_std = std::move(inv_std)](Tape& t, const Matrix& g) {
                if (t.needs(gamma)) t.accumulate(gamma, g.cwiseProduct(xhat).colwise().sum());
                if (t.needs(beta)) t.accumulate(beta, g.colwise().sum());
                if (!t.needs(x)) return;
                const Matrix gh = g.array().rowwise() * t.value(gamma).row(0).array();
                const double m = static_cast<double>(g.cols());
                Matrix dx(g.rows(), g.cols());
                for (Eigen::Index i = 0; i < g.rows(); ++i) {
                  const double s1 = gh.row(i).sum();
                  const double s2 = gh.row(i).dot(xhat.row(i));
                  dx.row(i) = inv_std[i] / m * (m * gh.row(i).array() - s1 - xhat.row(i).array() * s2);
                }
                t.accumulate(x, dx);
              });
}

Var Tape::attention(Var q, Var k, Var v, int heads) {
  const Matrix& Q = value(q);
  const Matrix& K = value(k);
  const Matrix& V = value(v);
  require(heads >= 1 && Q.cols() % heads == 0, "attention: width must divide into heads");
  require(Q.cols() == K.cols() && K.cols() == V.cols() && K.rows() == V.rows(), "attention: q/k/v shape mismatch");
  const Eigen::Index dh = Q.cols() / heads;
  const double s = 1.0 / std::sqrt(static_cast<double>(dh));
  Matrix out(Q.rows(), Q.cols());
  std::vector<Matrix> probs(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    const auto c0 = h * dh;
    const Matrix S = (Q.middleCols(c0, dh) * K.middleCols(c0, dh).transpose()) * s;
    probs[static_cast<std::size_t>(h)] = softmax_rows(S);
    out.middleCols(c0, dh) = probs[static_cast<std::size_t>(h)] * V.middleCols(c0, dh);
  }
  return push(std::move(out), needs(q) || needs(k) || needs(v),
              [q, k, v, heads, dh, s, probs = std::move(probs)](Tape& t, const Matrix& g) {
                const Matrix& Q = t.value(q);
                const Matrix& K = t.value(k);
                const Matrix& V = t.value(v);
                Matrix dQ = Matrix::Zero(Q.rows(), Q.cols());
                Matrix dK = Matrix::Zero(K.rows(), K.cols());
                Matrix dV = Matrix::Zero(V.rows(), V.cols());
                for (int h = 0; h < heads; ++h) {
                  const auto c0 = h * dh;
                  const Matrix& P = probs[static_cast<std::size_t>(h)];
                  const Matrix gh = g.middleCols(c0, dh);
                  dV.middleCols(c0, dh) = P.transpose() * gh;
                  const Matrix dP = gh * V.middleCols(c0, dh).transpose();
                  const Eigen::VectorXd rs = dP.cwiseProduct(P).rowwise().sum();
                  const Matrix dS = P.cwiseProduct(dP.colwise() - rs);
                  dQ.middleCols(c0, dh) = (dS * K.middleCols(c0, dh)) * s;
                  dK.middleCols(c0, dh) = (dS.transpose() * Q.middleCols(c0, dh)) * s;
                }
                t.accumulate(q, dQ);
                t.accumulate(k, dK);
                t.accumulate(v, dV);
              });
}

Var Tape::vstack(const std::vector<Var>& parts) {
  require(!parts.empty(), "vstack: no inputs");
  Eigen::Index rows = 0;
  const auto cols = value(parts[0]).cols();
  bool any = false;
  for (Var p : parts) {
    require(value(p).cols() == cols, "vstack: column counts differ");
    rows += value(p).rows();
    any = any || needs(p);
  }
  Matrix out(rows, cols);
  Eigen::Index r = 0;
  for (Var p : parts) {
    out.middleRows(r, value(p).rows()) = value(p);
    r += value(p).rows();
  }
  return push(std::move(out), any, [parts](Tape& t, const Matrix& g) {
    Eigen::Index r = 0;
    for (Var p : parts) {
      const auto n = t.value(p).rows();
      if (t.needs(p)) t.accumulate(p, g.middleRows(r, n));
      r += n;
    }
  });
}

Var Tape::row(Var a, int r) {
  require(r >= 0 && r < value(a).rows(), "row: index out of range");
  return push(value(a).row(r), needs(a), [a, r](Tape& t, const Matrix& g) {
    Matrix full = Matrix::Zero(t.value(a).rows(), t.value(a).cols());
    full.row(r) = g.row(0);
    t.accumulate(a, full);
  });
}

Var Tape::group_max(Var a, int group) {
  const Matrix& x = value(a);
  require(group >= 1 && x.rows() % group == 0, "group_max: rows must divide into groups");
  const auto G = x.rows() / group;
  Matrix out(G, x.cols());
  std::vector<Eigen::Index> arg(static_cast<std::size_t>(G * x.cols()));
  for (Eigen::Index gi = 0; gi < G; ++gi)
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      Eigen::Index best = gi * group;
      for (Eigen::Index r = best + 1; r < (gi + 1) * group; ++r)
        if (x(r, c) > x(best, c)) best = r;
      out(gi, c) = x(best, c);
      arg[static_cast<std::size_t>(gi * x.cols() + c)] = best;
    }
  return push(std::move(out), needs(a), [a, arg = std::move(arg)](Tape& t, const Matrix& g) {
    Matrix full = Matrix::Zero(t.value(a).rows(), t.value(a).cols());
    for (Eigen::Index gi = 0; gi < g.rows(); ++gi)
      for (Eigen::Index c = 0; c < g.cols(); ++c) full(arg[static_cast<std::size_t>(gi * g.cols() + c)], c) += g(gi, c);
    t.accumulate(a, full);
  });
}

Var Tape::softmax_cross_entropy(Var logits, const std::vector<int>& labels, double smoothing) {
  const Matrix& z = value(logits);
  require(static_cast<std::size_t>(z.rows()) == labels.size(), "softmax_cross_entropy: one label per row");
  require(smoothing >= 0.0 && smoothing < 1.0, "softmax_cross_entropy: smoothing must lie in [0, 1)");
  const auto B = z.rows();
  const auto C = z.cols();
  Matrix target = Matrix::Constant(B, C, smoothing / static_cast<double>(C));
  for (Eigen::Index i = 0; i < B; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    require(y >= 0 && y < C, "softmax_cross_entropy: label out of range");
    target(i, y) += 1.0 - smoothing;
  }
  const Matrix p = softmax_rows(z);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < B; ++i) {
    const double mx = z.row(i).maxCoeff();
    const double lse = mx + std::log((z.row(i).array() - mx).exp().sum());
    loss -= (target.row(i).array() * (z.row(i).array() - lse)).sum();
  }
  loss /= static_cast<double>(B);
  Matrix grad = (p - target) / static_cast<double>(B);
  return push(Matrix::Constant(1, 1, loss), needs(logits),
              [logits, grad = std::move(grad)](Tape& t, const Matrix& g) { t.accumulate(logits, grad * g(0, 0)); });
}

Var Tape::weighted_sum(const std::vector<std::pair<Var, double>>& terms) {
  double total = 0.0;
  bool any = false;
  for (const auto& [v, w] : terms) {
    require(value(v).size() == 1, "weighted_sum: terms must be 1x1");
    total += w * value(v)(0, 0);
    any = any || needs(v);
  }
  return push(Matrix::Constant(1, 1, total), any, [terms](Tape& t, const Matrix& g) {
    for (const auto& [v, w] : terms) t.accumulate(v, g * w);
  });
}

}  // namespace vgforge::model
