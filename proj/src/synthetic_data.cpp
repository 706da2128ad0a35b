#include "retasa/synthetic_data.hpp"

#include "retasa/errors.hpp"
#include "retasa/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace retasa {
namespace {

constexpr std::uint64_t stream_linear = 0x4c494e;
constexpr std::uint64_t stream_source = 0x535243;
constexpr std::uint64_t stream_target = 0x544752;

std::vector<std::string>
split_csv_line(const std::string& line)
{
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string
trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool
is_missing(const std::string& cell)
{
  return cell.empty() || cell == "NA" || cell == "?";
}

double
parse_number(const std::string& cell, std::size_t line_no, const std::string& column)
{
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+')
    ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v))
    throw DataError("nonnumeric cell '" + cell + "' in column '" + column + "' at line " +
                    std::to_string(line_no));
  return v;
}

} // namespace

LabeledData
gen_linear_raw(std::size_t n, std::uint64_t seed)
{
  Philox rng(seed, stream_linear);
  std::normal_distribution<double> normal(0.0, 1.0);
  LabeledData data{ PointSet(n, linear_design_beta.size()), std::vector<double>(n) };
  for (std::size_t i = 0; i < n; ++i) {
    double y = 0.0;
    for (std::size_t k = 0; k < linear_design_beta.size(); ++k) {
      const double xk = normal(rng);
      data.x.at(i, k) = xk;
      y += linear_design_beta[k] * xk;
    }
    data.y[i] = y + normal(rng);
  }
  return data;
}

LabeledData
trim_response_tails(const LabeledData& data, double fraction)
{
  if (!(fraction >= 0.0 && fraction < 0.5))
    throw ConfigError("trim fraction must lie in [0, 0.5)");
  const std::size_t n = data.size();
  const auto cut = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{ 0 });
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return data.y[a] < data.y[b];
  });
  std::vector<std::size_t> keep(order.begin() + static_cast<std::ptrdiff_t>(cut),
                                order.end() - static_cast<std::ptrdiff_t>(cut));
  std::sort(keep.begin(), keep.end());
  return data.select(keep);
}

LabeledData
gen_linear(std::size_t n, std::uint64_t seed)
{
  if (n < 20)
    throw ConfigError("linear design needs n >= 20");
  return trim_response_tails(gen_linear_raw(n, seed), 0.05);
}

namespace {

LabeledData
nonlinear_domain(std::size_t n, double mean, double sd, double noise_sd, Philox& rng)
{
  std::normal_distribution<double> normal(0.0, 1.0);
  LabeledData d{ PointSet(n, 1), std::vector<double>(n) };
  for (std::size_t i = 0; i < n; ++i) {
    const double y = mean + sd * normal(rng);
    d.y[i] = y;
    d.x.at(i, 0) = y + 3.0 * std::tanh(y) + noise_sd * normal(rng);
  }
  return d;
}

} // namespace

DomainPair
gen_nonlinear(std::size_t n,
              std::optional<std::size_t> m,
              double mu_t,
              std::uint64_t seed,
              const NonlinearDesign& design)
{
  const std::size_t m_eff = m.value_or(static_cast<std::size_t>(std::lround(0.8 * static_cast<double>(n))));
  if (n == 0 || m_eff == 0)
    throw ConfigError("nonlinear design needs n, m >= 1");
  Philox src_rng(seed, stream_source);
  Philox tgt_rng(seed, stream_target);
  return { nonlinear_domain(n, design.source_mean, design.source_sd, design.noise_sd, src_rng),
           nonlinear_domain(m_eff, mu_t, design.target_sd, design.noise_sd, tgt_rng) };
}

double
nonlinear_true_weight(double y, double mu_t, const NonlinearDesign& design)
{
  const double zt = (y - mu_t) / design.target_sd;
  const double zs = (y - design.source_mean) / design.source_sd;
  return (design.source_sd / design.target_sd) * std::exp(-0.5 * (zt * zt - zs * zs));
}

CsvLoadResult
load_csv(const std::string& path,
         const std::string& response_column,
         const std::vector<std::string>& feature_columns,
         bool log_response)
{
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open CSV file '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF)
      line.erase(0, 3);
    // Leading '#' lines are metadata (our own outputs carry one).
    if (!line.empty() && line[0] == '#')
      continue;
    have_header = true;
    break;
  }
  if (!have_header)
    throw DataError("CSV file '" + path + "' has no header row");

  auto header = split_csv_line(line);
  for (auto& h : header)
    h = trim(h);
  auto column_index = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw DataError("column '" + name + "' not found in '" + path + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t y_col = column_index(response_column);
  std::vector<std::size_t> x_cols;
  for (const auto& f : feature_columns)
    x_cols.push_back(column_index(f));
  if (x_cols.empty())
    throw DataError("at least one feature column is required");

  CsvLoadResult result;
  result.feature_names = feature_columns;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty())
      continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw DataError("line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                      " fields, header has " + std::to_string(header.size()));
    for (auto& f : fields)
      f = trim(f);

    bool missing = is_missing(fields[y_col]);
    for (auto c : x_cols)
      missing = missing || is_missing(fields[c]);
    if (missing) {
      ++result.dropped_rows;
      continue;
    }
    std::vector<double> row;
    row.reserve(x_cols.size());
    for (std::size_t k = 0; k < x_cols.size(); ++k)
      row.push_back(parse_number(fields[x_cols[k]], line_no, feature_columns[k]));
    double y = parse_number(fields[y_col], line_no, response_column);
    if (log_response) {
      if (!(y > 0.0))
        throw DataError("log transform of nonpositive response " + fields[y_col] + " at line " +
                        std::to_string(line_no));
      y = std::log(y);
    }
    rows.push_back(std::move(row));
    result.data.y.push_back(y);
  }
  if (rows.empty())
    throw DataError("no complete rows in '" + path + "'");
  result.data.x = PointSet::from_rows(rows);
  return result;
}

} // namespace retasa
