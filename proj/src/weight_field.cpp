#include "mwsq/weight_field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mwsq/errors.hpp"

namespace mwsq {

MatrixWeightField::MatrixWeightField(CellField base, WeightOptions options)
    : base_(std::move(base)), cache_(std::make_shared<Cache>()) {
  if (base_.kind() != FieldKind::matrix) throw InputError("matrix weight requires a matrix field");
  const int nn = n();
  const std::size_t cells = base_.cells();
  eigenvalues_.resize(cells * nn);
  eigenvectors_.resize(cells * nn * nn);

  for (std::size_t c = 0; c < cells; ++c) {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
        base_.cell(c).data(), nn, nn);
    const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
      throw DefinitenessError("weight is not symmetric at cell " + std::to_string(c));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
    for (int i = 0; i < nn; ++i) eigenvalues_[c * nn + i] = es.eigenvalues()(i);
    for (int i = 0; i < nn; ++i)
      for (int j = 0; j < nn; ++j) eigenvectors_[c * nn * nn + i * nn + j] = es.eigenvectors()(i, j);
  }

  const double top = *std::max_element(eigenvalues_.begin(), eigenvalues_.end());
  const double floor = options.floor_rel * top;
  for (std::size_t c = 0; c < cells; ++c) {
    double lo = eigenvalues_[c * nn];
    if (!(lo > floor)) {
      if (!options.clamp) {
        throw DefinitenessError("weight eigenvalue " + std::to_string(lo) + " below floor at cell " +
                                std::to_string(c));
      }
      for (int i = 0; i < nn; ++i) eigenvalues_[c * nn + i] = std::max(eigenvalues_[c * nn + i], floor);
      lo = eigenvalues_[c * nn];
    }
    const double cond = eigenvalues_[c * nn + nn - 1] / lo;
    if (cond > options.condition_cap) {
      throw DefinitenessError("condition number " + std::to_string(cond) + " exceeds cap at cell " +
                              std::to_string(c));
    }
    max_condition_ = std::max(max_condition_, cond);
  }
}

const std::vector<double>& MatrixWeightField::power(double t) const {
  std::lock_guard lock(cache_->mutex);
  auto it = cache_->powers.find(t);
  if (it != cache_->powers.end()) return *it->second;

  const int nn = n();
  const std::size_t cells = base_.cells();
  auto out = std::make_unique<std::vector<double>>(cells * nn * nn);
  double* dst = out->data();
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(cells); ++c) {
    const double* q = eigenvectors_.data() + c * nn * nn;
    const double* lam = eigenvalues_.data() + c * nn;
    double* m = dst + c * nn * nn;
    for (int i = 0; i < nn; ++i) {
      for (int j = i; j < nn; ++j) {
        double s = 0.0;
        for (int k = 0; k < nn; ++k) s += q[i * nn + k] * std::pow(lam[k], t) * q[j * nn + k];
        m[i * nn + j] = s;
        m[j * nn + i] = s;
      }
    }
  }
  const auto& ref = *out;
  cache_->powers.emplace(t, std::move(out));
  return ref;
}

MatrixWeightField MatrixWeightField::identity(const GridSpec& grid) {
  CellField f(grid, FieldKind::matrix);
  const int n = grid.vector_dim();
  for (std::size_t c = 0; c < f.cells(); ++c) {
    auto m = f.cell(c);
    for (int i = 0; i < n; ++i) m[i * n + i] = 1.0;
  }
  return MatrixWeightField(std::move(f));
}

MatrixWeightField MatrixWeightField::from_scalar(const CellField& w, WeightOptions options) {
  if (w.kind() != FieldKind::scalar) throw InputError("from_scalar takes a scalar field");
  const GridSpec g(w.grid().dimension(), w.grid().depth(), 1);
  return MatrixWeightField(CellField(g, FieldKind::matrix, std::vector<double>(w.values().begin(), w.values().end())),
                           options);
}

}  // namespace mwsq
