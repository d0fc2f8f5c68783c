#include <numeric>

#include "plx/evalkappa.hpp"

namespace plx::evalkappa {

ConfusionMatrix::ConfusionMatrix(std::size_t labels) : n_(labels), cells_(labels * labels, 0) {}

ConfusionMatrix::ConfusionMatrix(std::initializer_list<std::initializer_list<std::size_t>> rows)
    : ConfusionMatrix(rows.size()) {
  std::size_t r = 0;
  for (const auto& row : rows) {
    if (row.size() != n_) throw DataError("confusion matrix must be square");
    std::size_t c = 0;
    for (std::size_t v : row) cells_[r * n_ + c++] = v;
    ++r;
  }
}

void ConfusionMatrix::add(std::size_t reference, std::size_t other, std::size_t times) {
  if (reference >= n_ || other >= n_) throw DataError("label index out of range");
  cells_[reference * n_ + other] += times;
}

std::size_t ConfusionMatrix::at(std::size_t reference, std::size_t other) const {
  return cells_.at(reference * n_ + other);
}

std::size_t ConfusionMatrix::total() const {
  return std::accumulate(cells_.begin(), cells_.end(), std::size_t{0});
}

ConfusionMatrix ConfusionMatrix::transposed() const {
  ConfusionMatrix t(n_);
  for (std::size_t r = 0; r < n_; ++r) {
    for (std::size_t c = 0; c < n_; ++c) t.cells_[c * n_ + r] = at(r, c);
  }
  return t;
}

KappaStats kappa(const ConfusionMatrix& m) {
  KappaStats s;
  s.n = m.total();
  if (s.n == 0) throw DataError("kappa of an empty confusion matrix");
  const double n = static_cast<double>(s.n);
  double agree = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    agree += static_cast<double>(m.at(i, i));
    double row = 0.0, col = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) {
      row += static_cast<double>(m.at(i, j));
      col += static_cast<double>(m.at(j, i));
    }
    s.p_e += (row / n) * (col / n);
  }
  s.p_o = agree / n;
  if (s.p_e >= 1.0) {
    s.degenerate = true;
    s.kappa = s.p_o >= 1.0 ? 1.0 : 0.0;
    return s;
  }
  s.kappa = (s.p_o - s.p_e) / (1.0 - s.p_e);
  return s;
}

}  // namespace plx::evalkappa
