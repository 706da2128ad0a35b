#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace retasa {

//! A set of n points in R^d stored dimension-major: coordinate k of every
//! point is contiguous, which is the layout the kernel loops stream over.
class PointSet
{
public:
  PointSet() = default;
  PointSet(std::size_t size, std::size_t dim);

  //! One scalar per point (d = 1).
  static PointSet from_scalars(std::span<const double> values);
  //! Row-major input, one inner vector per point. All rows must share a
  //! dimension >= 1.
  static PointSet from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t size() const { return size_; }
  std::size_t dim() const { return dim_; }
  bool empty() const { return size_ == 0; }

  std::span<const double> coord(std::size_t k) const
  {
    return { data_.data() + k * size_, size_ };
  }
  std::span<double> coord(std::size_t k)
  {
    return { data_.data() + k * size_, size_ };
  }

  double at(std::size_t i, std::size_t k) const { return data_[k * size_ + i]; }
  double& at(std::size_t i, std::size_t k) { return data_[k * size_ + i]; }

  std::vector<double> row(std::size_t i) const;
  PointSet select(std::span<const std::size_t> indices) const;

private:
  std::vector<double> data_;
  std::size_t size_{ 0 };
  std::size_t dim_{ 0 };
};

//! Paired covariates and continuous responses.
struct LabeledData
{
  PointSet x;
  std::vector<double> y;

  std::size_t size() const { return y.size(); }
  LabeledData select(std::span<const std::size_t> indices) const;
};

} // namespace retasa
