#pragma once

#include <concepts>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace annfolio {

/// Shortest decimal text that parses back to exactly `x`.
std::string format_double(double x);

/// Strict whole-field parsers; throw std::invalid_argument mentioning `what`.
double parse_double(std::string_view text, std::string_view what);
std::uint64_t parse_u64(std::string_view text, std::string_view what);

/// Splits one CSV record on commas and trims surrounding blanks and a
/// trailing carriage return. Quoting is not supported.
std::vector<std::string_view> split_csv_line(std::string_view line);

/// 64-bit FNV-1a, rendered as 16 hex digits by hash_hex.
std::uint64_t fnv1a64(std::string_view data) noexcept;
std::string hash_hex(std::string_view data);

/// First line written above a CSV header: "# config_hash=<h> seed=<s>".
struct Provenance {
  std::string config_hash;
  std::string seeds;
};

void write_provenance(std::ostream& out, const std::optional<Provenance>& provenance);

/// Minimal CSV emitter: a header, then rows of preformatted fields.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::span<const std::string_view> header,
            const std::optional<Provenance>& provenance = std::nullopt);

  CsvWriter& field(std::string_view text);
  CsvWriter& field(double x);
  template <std::integral I>
  CsvWriter& field(I x) {
    return field(std::string_view(std::to_string(x)));
  }
  void end_row();

 private:
  std::ostream& out_;
  std::size_t columns_;
  std::size_t in_row_ = 0;
};

/// gnuplot script plotting columns of a comma-separated file.
struct PlotSeries {
  std::string using_spec;  // e.g. "2:3"
  std::string title;
  std::string style = "lines";
  std::string filter;      // optional extra qualifier, e.g. "every ::1"
};

std::string gnuplot_script(std::string_view csv_name, std::string_view title, std::string_view xlabel,
                           std::string_view ylabel, std::span<const PlotSeries> series,
                           std::string_view extra = {});

}  // namespace annfolio
