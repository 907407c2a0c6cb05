#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "annfolio/market.hpp"

namespace annfolio {

/// Daily observations, annualized with 252 trading days per year.
inline constexpr double kDailyStep = 1.0 / 252.0;
inline constexpr std::size_t kMinObservations = 30;

struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  auto operator<=>(const Date&) const = default;
};

/// Parses YYYY-MM-DD; throws std::invalid_argument on anything else.
Date parse_iso_date(std::string_view text);
std::string to_string(const Date& date);

/// Dated positive prices, strictly increasing in date.
struct PriceSeries {
  std::vector<Date> dates;
  std::vector<double> prices;

  std::size_t size() const noexcept { return prices.size(); }
};

/// Dated squared volatilities Y = (VIX / 100)^2.
struct VarianceSeries {
  std::vector<Date> dates;
  std::vector<double> variances;

  std::size_t size() const noexcept { return variances.size(); }
};

/// Reads `date,adj_close`. `source` names the input in error messages.
PriceSeries parse_price_csv(std::istream& in, std::string_view source = "<stream>");
PriceSeries load_price_csv(const std::filesystem::path& path);

/// Reads `date,vix_close` and converts each quote with vix_to_variance.
VarianceSeries parse_vix_csv(std::istream& in, std::string_view source = "<stream>");
VarianceSeries load_vix_csv(const std::filesystem::path& path);

/// (quote / 100)^2. Throws for negative quotes.
double vix_to_variance(double vix_quote);

struct GbmEstimate {
  double mu = 0.0;
  double sigma = 0.0;
  std::size_t observations = 0;
};

/// Maximum likelihood from log returns x: sigma^2 = var(x) / dt,
/// mu = mean(x) / dt + sigma^2 / 2.
GbmEstimate calibrate_gbm(const PriceSeries& series, double dt = kDailyStep);

struct HestonEstimate {
  double mu = 0.0;
  double kappa = 0.0;
  double theta = 0.0;
  double sigma_y = 0.0;
  double rho = 0.0;
  bool feller = false;
  std::size_t observations = 0;  // transitions used in the variance regression
  std::size_t skipped = 0;       // transitions dropped because Y_k <= 0

  MarketParams to_params(double r) const;
};

/// Weighted least squares on the Euler transition of the variance,
///   dY_k = kappa theta dt - kappa Y_k dt + noise,  weight 1 / (Y_k dt),
/// with sigma_y from the weighted residuals and rho from the correlation of
/// standardized stock and variance residuals.
HestonEstimate calibrate_heston(const PriceSeries& prices, const VarianceSeries& variances,
                                double dt = kDailyStep);

/// Same estimator on raw, already aligned arrays.
HestonEstimate calibrate_heston(std::span<const double> prices, std::span<const double> variances,
                                double dt = kDailyStep);

}  // namespace annfolio
