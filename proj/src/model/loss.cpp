#include "vgforge/model/loss.hpp"

#include <cmath>

#include "vgforge/error.hpp"

namespace vgforge::model {

namespace {

Matrix targets(Eigen::Index rows, Eigen::Index C, const std::vector<int>& labels, double smoothing) {
  if (static_cast<std::size_t>(rows) != labels.size()) throw InvalidParameter("one label per row required");
  if (!(smoothing >= 0.0 && smoothing < 1.0)) throw InvalidParameter("smoothing must lie in [0, 1)");
  Matrix y = Matrix::Constant(rows, C, smoothing / static_cast<double>(C));
  for (Eigen::Index i = 0; i < rows; ++i) {
    const int c = labels[static_cast<std::size_t>(i)];
    if (c < 0 || c >= C) throw InvalidParameter("label " + std::to_string(c) + " out of range");
    y(i, c) += 1.0 - smoothing;
  }
  return y;
}

void check_binary(const Matrix& logits, const std::vector<int>& consistency) {
  if (logits.cols() != 2) throw InvalidParameter("pair logits must have two columns");
  for (int v : consistency)
    if (v != 0 && v != 1) throw InvalidParameter("consistency labels must be 0 or 1");
}

}  // namespace

double ce_loss(const Matrix& probs, const std::vector<int>& labels, double smoothing) {
  const Matrix y = targets(probs.rows(), probs.cols(), labels, smoothing);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y.data()[i] != 0.0) loss -= y.data()[i] * std::log(probs.data()[i]);
  return loss / static_cast<double>(probs.rows());
}

double ce_loss_from_logits(const Matrix& logits, const std::vector<int>& labels, double smoothing) {
  Tape t;
  return t.value(t.softmax_cross_entropy(t.constant(logits), labels, smoothing))(0, 0);
}

Matrix ce_grad_logits(const Matrix& logits, const std::vector<int>& labels, double smoothing) {
  const Matrix y = targets(logits.rows(), logits.cols(), labels, smoothing);
  return (softmax_rows(logits) - y) / static_cast<double>(logits.rows());
}

double vgc_loss(const Matrix& pair_logits, const std::vector<int>& consistency) {
  check_binary(pair_logits, consistency);
  return ce_loss_from_logits(pair_logits, consistency);
}

Matrix vgc_grad_logits(const Matrix& pair_logits, const std::vector<int>& consistency) {
  check_binary(pair_logits, consistency);
  return ce_grad_logits(pair_logits, consistency);
}

}  // namespace vgforge::model
