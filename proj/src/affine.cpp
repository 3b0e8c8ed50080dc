#include "vibro/affine.hpp"

#include <algorithm>
#include <cmath>

namespace vibro
{

AffineModel::AffineModel(int n, std::vector<AffineTerm> terms, std::function<Vec(double)> load,
                         SpMat output)
    : n_(n), terms_(std::move(terms)), load_(std::move(load)), output_(std::move(output))
{
  std::vector<Eigen::Triplet<Complex>> trip;
  for (int i = 0; i < n_; ++i)
    trip.emplace_back(i, i, 1.0);
  for (auto &t : terms_)
  {
    t.matrix.makeCompressed();
    if (t.row_offset + t.matrix.rows() > n_ || t.col_offset + t.matrix.cols() > n_)
      throw Error("affine model: term exceeds the system dimension");
    for (int k = 0; k < t.matrix.outerSize(); ++k)
    {
      for (RealSpMat::InnerIterator it(t.matrix, k); it; ++it)
        trip.emplace_back(t.row_offset + it.row(), t.col_offset + it.col(), 1.0);
    }
  }
  pattern_.resize(n_, n_);
  pattern_.setFromTriplets(trip.begin(), trip.end());
  pattern_.makeCompressed();
  pattern_.coeffs().setZero();

  const int *outer = pattern_.outerIndexPtr();
  const int *inner = pattern_.innerIndexPtr();
  for (const auto &t : terms_)
  {
    std::vector<int> pos;
    pos.reserve(t.matrix.nonZeros());
    for (int k = 0; k < t.matrix.outerSize(); ++k)
    {
      for (RealSpMat::InnerIterator it(t.matrix, k); it; ++it)
      {
        const int c = t.col_offset + it.col(), r = t.row_offset + it.row();
        const int *p = std::lower_bound(inner + outer[c], inner + outer[c + 1], r);
        pos.push_back(static_cast<int>(p - inner));
      }
    }
    pos_.push_back(std::move(pos));
  }
  if (output_.cols() != 0 && output_.cols() != n_)
    throw Error("affine model: output map has the wrong width");
}

bool AffineModel::has_damping() const
{
  return std::any_of(terms_.begin(), terms_.end(),
                     [](const AffineTerm &t) { return t.kind == TermKind::damping; });
}

Complex AffineModel::operator_coefficient(std::size_t t, double f) const
{
  const double w = angular(f);
  const Complex c = terms_[t].coef(f);
  switch (terms_[t].kind)
  {
    case TermKind::stiffness:
      return c;
    case TermKind::damping:
      return Complex(0.0, w) * c;
    case TermKind::mass:
      return -w * w * c;
  }
  return c;
}

void AffineModel::operator_values(double f, std::vector<Complex> &values) const
{
  values.assign(pattern_.nonZeros(), Complex(0.0));
  for (std::size_t t = 0; t < terms_.size(); ++t)
  {
    const Complex c = operator_coefficient(t, f);
    const double *v = terms_[t].matrix.valuePtr();
    const auto &pos = pos_[t];
    for (std::size_t k = 0; k < pos.size(); ++k)
      values[pos[k]] += c * v[k];
  }
}

SpMat AffineModel::operator_at(double f) const
{
  SpMat A = pattern_;
  std::vector<Complex> values;
  operator_values(f, values);
  std::copy(values.begin(), values.end(), A.valuePtr());
  return A;
}

SystemMatrices AffineModel::matrices(double f) const
{
  SystemMatrices s{pattern_, pattern_, pattern_};
  for (std::size_t t = 0; t < terms_.size(); ++t)
  {
    const Complex c = terms_[t].coef(f);
    SpMat &target = terms_[t].kind == TermKind::stiffness ? s.K
                    : terms_[t].kind == TermKind::damping ? s.D
                                                          : s.M;
    Complex *out = target.valuePtr();
    const double *v = terms_[t].matrix.valuePtr();
    const auto &pos = pos_[t];
    for (std::size_t k = 0; k < pos.size(); ++k)
      out[pos[k]] += c * v[k];
  }
  return s;
}

SpMat AffineModel::term_global(std::size_t t) const
{
  const auto &term = terms_[t];
  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(term.matrix.nonZeros());
  for (int k = 0; k < term.matrix.outerSize(); ++k)
  {
    for (RealSpMat::InnerIterator it(term.matrix, k); it; ++it)
      trip.emplace_back(term.row_offset + it.row(), term.col_offset + it.col(), it.value());
  }
  SpMat G(n_, n_);
  G.setFromTriplets(trip.begin(), trip.end());
  return G;
}

Eigen::VectorXd AffineModel::balancing_scale(double f) const
{
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n_);
  for (std::size_t t = 0; t < terms_.size(); ++t)
  {
    const auto &term = terms_[t];
    const double c = std::abs(operator_coefficient(t, f));
    for (int k = 0; k < term.matrix.outerSize(); ++k)
    {
      for (RealSpMat::InnerIterator it(term.matrix, k); it; ++it)
      {
        const int r = term.row_offset + it.row();
        if (r == term.col_offset + it.col())
          d(r) += c * std::abs(it.value());
      }
    }
  }
  for (int i = 0; i < n_; ++i)
    d(i) = d(i) > 0.0 ? 1.0 / std::sqrt(d(i)) : 1.0;
  return d;
}

AffineModel AffineModel::scaled(const Eigen::VectorXd &s) const
{
  if (s.size() != n_)
    throw Error("affine model: scale vector has the wrong size");
  std::vector<AffineTerm> terms = terms_;
  for (auto &t : terms)
  {
    const Eigen::VectorXd sr = s.segment(t.row_offset, t.matrix.rows());
    const Eigen::VectorXd sc = s.segment(t.col_offset, t.matrix.cols());
    t.matrix = sr.asDiagonal() * t.matrix * sc.asDiagonal();
  }
  auto load = load_;
  std::function<Vec(double)> scaled_load;
  if (load)
    scaled_load = [load, s](double f) -> Vec { return s.cast<Complex>().cwiseProduct(load(f)); };
  SpMat out = output_.cols() == n_ ? SpMat(output_ * s.cast<Complex>().asDiagonal()) : output_;
  return AffineModel(n_, std::move(terms), std::move(scaled_load), std::move(out));
}

}  // namespace vibro
