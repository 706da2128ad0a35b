#include "retasa/point_set.hpp"

#include "retasa/errors.hpp"

#include <algorithm>
#include <string>

namespace retasa {

PointSet::PointSet(std::size_t size, std::size_t dim)
  : data_(size * dim, 0.0)
  , size_(size)
  , dim_(dim)
{}

PointSet
PointSet::from_scalars(std::span<const double> values)
{
  PointSet p(values.size(), 1);
  std::copy(values.begin(), values.end(), p.data_.begin());
  return p;
}

PointSet
PointSet::from_rows(const std::vector<std::vector<double>>& rows)
{
  if (rows.empty())
    return PointSet(0, 0);
  const std::size_t d = rows.front().size();
  if (d == 0)
    throw DataError("points must have dimension >= 1");
  PointSet p(rows.size(), d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d)
      throw DataError("dimension mismatch: row " + std::to_string(i) +
                      " has " + std::to_string(rows[i].size()) +
                      " coordinates, expected " + std::to_string(d));
    for (std::size_t k = 0; k < d; ++k)
      p.at(i, k) = rows[i][k];
  }
  return p;
}

std::vector<double>
PointSet::row(std::size_t i) const
{
  std::vector<double> r(dim_);
  for (std::size_t k = 0; k < dim_; ++k)
    r[k] = at(i, k);
  return r;
}

PointSet
PointSet::select(std::span<const std::size_t> indices) const
{
  PointSet p(indices.size(), dim_);
  for (std::size_t k = 0; k < dim_; ++k)
    for (std::size_t j = 0; j < indices.size(); ++j)
      p.at(j, k) = at(indices[j], k);
  return p;
}

LabeledData
LabeledData::select(std::span<const std::size_t> indices) const
{
  LabeledData out{ x.select(indices), {} };
  out.y.reserve(indices.size());
  for (auto i : indices)
    out.y.push_back(y[i]);
  return out;
}

} // namespace retasa
