#include "annfolio/export.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace annfolio {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf.data(), end);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

double parse_double(std::string_view text, std::string_view what) {
  const std::string_view t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
    throw std::invalid_argument(std::string(what) + ": '" + std::string(t) + "' is not a number");
  }
  return value;
}

std::uint64_t parse_u64(std::string_view text, std::string_view what) {
  const std::string_view t = trim(text);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
    throw std::invalid_argument(std::string(what) + ": '" + std::string(t) + "' is not an unsigned integer");
  }
  return value;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

std::uint64_t fnv1a64(std::string_view data) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::string_view data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::uint64_t h = fnv1a64(data);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[h & 0xf];
    h >>= 4;
  }
  return out;
}

void write_provenance(std::ostream& out, const std::optional<Provenance>& provenance) {
  if (!provenance) return;
  out << "# config_hash=" << provenance->config_hash << " seed=" << provenance->seeds << '\n';
}

CsvWriter::CsvWriter(std::ostream& out, std::span<const std::string_view> header,
                     const std::optional<Provenance>& provenance)
    : out_(out), columns_(header.size()) {
  write_provenance(out_, provenance);
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

CsvWriter& CsvWriter::field(std::string_view text) {
  if (in_row_ == columns_) throw std::logic_error("csv: too many fields in row");
  if (in_row_++ > 0) out_ << ',';
  out_ << text;
  return *this;
}

CsvWriter& CsvWriter::field(double x) { return field(std::string_view(format_double(x))); }

void CsvWriter::end_row() {
  if (in_row_ != columns_) throw std::logic_error("csv: row has too few fields");
  out_ << '\n';
  in_row_ = 0;
}

std::string gnuplot_script(std::string_view csv_name, std::string_view title, std::string_view xlabel,
                           std::string_view ylabel, std::span<const PlotSeries> series, std::string_view extra) {
  std::ostringstream s;
  s << "# gnuplot script generated by annfolio\n"
    << "set terminal png size 900,600\n"
    << "set output '" << csv_name << ".png'\n"
    << "set datafile separator ','\n"
    << "set datafile commentschars '#'\n"
    << "set key autotitle columnhead\n"
    << "set title '" << title << "'\n"
    << "set xlabel '" << xlabel << "'\n"
    << "set ylabel '" << ylabel << "'\n"
    << "set grid\n";
  if (!extra.empty()) s << extra << (extra.back() == '\n' ? "" : "\n");
  s << "plot ";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const PlotSeries& p = series[i];
    if (i > 0) s << ", \\\n     ";
    s << "'" << csv_name << "' ";
    if (!p.filter.empty()) s << p.filter << ' ';
    s << "using " << p.using_spec << " with " << p.style << " title '" << p.title << "'";
  }
  s << '\n';
  return s.str();
}

}  // namespace annfolio
