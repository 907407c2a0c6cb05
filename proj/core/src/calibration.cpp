#include "annfolio/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "annfolio/export.hpp"

namespace annfolio {

namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && is_leap(y) ? 29 : kDays[m - 1];
}

struct DatedValues {
  std::vector<Date> dates;
  std::vector<double> values;
};

/// Parses a two-column dated CSV, validates each value with `check`, sorts by
/// date and rejects duplicates.
template <class Check>
DatedValues parse_dated_csv(std::istream& in, std::string_view source, std::string_view value_column,
                            Check&& check) {
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) -> void {
    throw std::runtime_error(std::string(source) + ":" + std::to_string(line_no) + ": " + what);
  };

  bool have_header = false;
  while (!have_header && std::getline(in, line)) {
    ++line_no;
    if (split_csv_line(line) == std::vector<std::string_view>{""}) continue;
    const auto header = split_csv_line(line);
    if (header.size() != 2 || header[0] != "date" || header[1] != value_column) {
      fail("expected header 'date," + std::string(value_column) + "'");
    }
    have_header = true;
  }
  if (!have_header) {
    line_no = 0;
    fail("file is empty");
  }

  std::vector<std::pair<Date, double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_csv_line(line);
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != 2) fail("expected 2 fields, found " + std::to_string(fields.size()));
    try {
      const Date date = parse_iso_date(fields[0]);
      const double value = parse_double(fields[1], value_column);
      check(value);
      rows.emplace_back(date, value);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }

  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  DatedValues out;
  out.dates.reserve(rows.size());
  out.values.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].first == rows[i - 1].first) {
      throw std::runtime_error(std::string(source) + ": duplicate date " + to_string(rows[i].first));
    }
    out.dates.push_back(rows[i].first);
    out.values.push_back(rows[i].second);
  }
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

double mean(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double correlation(std::span<const double> a, std::span<const double> b) {
  const double ma = mean(a);
  const double mb = mean(b);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

Date parse_iso_date(std::string_view text) {
  auto bad = [&] { return std::invalid_argument("'" + std::string(text) + "' is not a YYYY-MM-DD date"); };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw bad();
  auto number = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (text[i] < '0' || text[i] > '9') throw bad();
      v = v * 10 + (text[i] - '0');
    }
    return v;
  };
  Date d{number(0, 4), number(5, 2), number(8, 2)};
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month)) throw bad();
  return d;
}

std::string to_string(const Date& date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", date.year, date.month, date.day);
  return buf;
}

PriceSeries parse_price_csv(std::istream& in, std::string_view source) {
  auto rows = parse_dated_csv(in, source, "adj_close", [](double p) {
    if (!(p > 0.0) || !std::isfinite(p)) throw std::invalid_argument("price must be positive");
  });
  return PriceSeries{std::move(rows.dates), std::move(rows.values)};
}

PriceSeries load_price_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_price_csv(in, path.string());
}

double vix_to_variance(double vix_quote) {
  if (!(vix_quote >= 0.0)) throw std::invalid_argument("VIX quote must be >= 0");
  // squaring first keeps round quotes exact: 20 -> 400 / 10000 = 0.04
  return vix_quote * vix_quote / 10000.0;
}

VarianceSeries parse_vix_csv(std::istream& in, std::string_view source) {
  auto rows = parse_dated_csv(in, source, "vix_close", [](double q) {
    if (!(q >= 0.0) || !std::isfinite(q)) throw std::invalid_argument("VIX quote must be >= 0");
  });
  for (double& v : rows.values) v = vix_to_variance(v);
  return VarianceSeries{std::move(rows.dates), std::move(rows.values)};
}

VarianceSeries load_vix_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_vix_csv(in, path.string());
}

GbmEstimate calibrate_gbm(const PriceSeries& series, double dt) {
  if (series.size() < kMinObservations) {
    throw std::invalid_argument("calibrate_gbm: need at least " + std::to_string(kMinObservations) +
                                " observations, got " + std::to_string(series.size()));
  }
  std::vector<double> x(series.size() - 1);
  for (std::size_t i = 0; i + 1 < series.size(); ++i) x[i] = std::log(series.prices[i + 1] / series.prices[i]);
  const double m = mean(x);
  double ss = 0.0;
  for (double xi : x) ss += (xi - m) * (xi - m);
  const double var = ss / static_cast<double>(x.size());  // MLE normalization
  GbmEstimate est;
  const double sigma2 = var / dt;
  est.sigma = std::sqrt(sigma2);
  est.mu = m / dt + 0.5 * sigma2;
  est.observations = series.size();
  return est;
}

HestonEstimate calibrate_heston(const PriceSeries& prices, const VarianceSeries& variances, double dt) {
  if (prices.size() != variances.size()) {
    throw std::invalid_argument("calibrate_heston: price and variance series have different lengths (" +
                                std::to_string(prices.size()) + " vs " + std::to_string(variances.size()) + ")");
  }
  for (std::size_t i = 0; i < prices.size(); ++i) {
    if (prices.dates[i] != variances.dates[i]) {
      throw std::invalid_argument("calibrate_heston: series are not aligned at row " + std::to_string(i) + " (" +
                                  to_string(prices.dates[i]) + " vs " + to_string(variances.dates[i]) + ")");
    }
  }
  return calibrate_heston(std::span<const double>(prices.prices), std::span<const double>(variances.variances), dt);
}

HestonEstimate calibrate_heston(std::span<const double> prices, std::span<const double> variances, double dt) {
  if (prices.size() != variances.size()) throw std::invalid_argument("calibrate_heston: length mismatch");
  if (prices.size() < kMinObservations) {
    throw std::invalid_argument("calibrate_heston: need at least " + std::to_string(kMinObservations) +
                                " observations, got " + std::to_string(prices.size()));
  }
  for (double p : prices) {
    if (!(p > 0.0)) throw std::invalid_argument("calibrate_heston: prices must be positive");
  }
  for (double y : variances) {
    if (!(y >= 0.0)) throw std::invalid_argument("calibrate_heston: variances must be >= 0");
  }

  HestonEstimate est;
  const std::size_t transitions = prices.size() - 1;
  std::vector<double> returns(transitions);
  for (std::size_t k = 0; k < transitions; ++k) returns[k] = (prices[k + 1] - prices[k]) / prices[k];
  est.mu = mean(returns) / dt;

  // Divide the transition by sqrt(Y_k): z = alpha / sqrt(Y) + beta sqrt(Y) + sigma_y dB,
  // with alpha = kappa theta dt and beta = -kappa dt.
  std::vector<std::size_t> used;
  used.reserve(transitions);
  double saa = 0.0, sbb = 0.0, sab = 0.0, saz = 0.0, sbz = 0.0, szz = 0.0;
  for (std::size_t k = 0; k < transitions; ++k) {
    const double y = variances[k];
    if (!(y > 0.0)) {
      ++est.skipped;
      continue;
    }
    const double root = std::sqrt(y);
    const double a = 1.0 / root;
    const double b = root;
    const double z = (variances[k + 1] - y) / root;
    saa += a * a;
    sbb += b * b;
    sab += a * b;
    saz += a * z;
    sbz += b * z;
    szz += z * z;
    used.push_back(k);
  }
  est.observations = used.size();
  const double det = saa * sbb - sab * sab;
  if (used.size() < 3 || !(det > 1e-12 * saa * sbb)) {
    throw std::invalid_argument("calibrate_heston: variance series is (numerically) constant; kappa is not identifiable");
  }
  const double alpha = (sbb * saz - sab * sbz) / det;
  const double beta = (saa * sbz - sab * saz) / det;
  est.kappa = -beta / dt;
  est.theta = -alpha / beta;

  std::vector<double> var_resid(used.size());
  std::vector<double> stock_resid(used.size());
  double sse = 0.0;
  for (std::size_t i = 0; i < used.size(); ++i) {
    const std::size_t k = used[i];
    const double root = std::sqrt(variances[k]);
    const double e = (variances[k + 1] - variances[k]) / root - alpha / root - beta * root;
    var_resid[i] = e;
    sse += e * e;
    stock_resid[i] = (returns[k] - est.mu * dt) / (root * std::sqrt(dt));
  }
  est.sigma_y = std::sqrt(sse / (static_cast<double>(used.size() - 2) * dt));
  // Noise-free variance paths leave only rounding in the residuals.
  est.rho = sse > 1e-20 * szz ? correlation(stock_resid, var_resid) : 0.0;
  est.feller = 2.0 * est.kappa * est.theta > est.sigma_y * est.sigma_y;
  return est;
}

MarketParams HestonEstimate::to_params(double r) const {
  return MarketParams::heston(r, mu, kappa, theta, sigma_y, rho);
}

}  // namespace annfolio
