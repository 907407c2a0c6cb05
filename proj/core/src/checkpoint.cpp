#include "annfolio/checkpoint.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "annfolio/export.hpp"

namespace annfolio {

namespace {

constexpr std::string_view kMagic = "annfolio-checkpoint";
constexpr int kFormatVersion = 1;

void write_values(std::ostream& out, std::span<const double> values) {
  for (double v : values) out << format_double(v) << '\n';
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::string next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return line;
    }
    fail("unexpected end of file");
  }

  /// Reads "<key> <rest>" and returns the words after the key.
  std::vector<std::string> keyed(std::string_view key) {
    std::istringstream words(next());
    std::string found;
    words >> found;
    if (found != key) fail("expected '" + std::string(key) + "', found '" + found + "'");
    std::vector<std::string> rest;
    for (std::string w; words >> w;) rest.push_back(w);
    return rest;
  }

  std::string single(std::string_view key) {
    auto rest = keyed(key);
    if (rest.size() != 1) fail("'" + std::string(key) + "' takes exactly one value");
    return rest[0];
  }

  std::vector<double> values(std::size_t count) {
    std::vector<double> out(count);
    for (double& v : out) v = number(next());
    return out;
  }

  double number(std::string_view text) {
    try {
      return parse_double(text, "value");
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }

  std::uint64_t integer(std::string_view text) {
    try {
      return parse_u64(text, "count");
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw std::runtime_error("checkpoint line " + std::to_string(line_no_) + ": " + what);
  }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out << kMagic << ' ' << kFormatVersion << '\n';
  out << "widths";
  for (std::size_t w : ckpt.theta.arch().widths()) out << ' ' << w;
  out << '\n';
  out << "y_scale " << format_double(ckpt.theta.arch().y_scale()) << '\n';
  out << "seed " << ckpt.seed << '\n';
  out << "eta " << format_double(ckpt.eta) << '\n';
  out << "horizon " << format_double(ckpt.horizon) << '\n';
  out << "model " << ckpt.model << '\n';
  if (ckpt.input_y) out << "input_y " << format_double(*ckpt.input_y) << '\n';
  out << "config_hash " << ckpt.config_hash << '\n';
  out << "cursor " << ckpt.steps_done << ' ' << ckpt.phase << ' ' << ckpt.step_in_phase << '\n';
  out << "params " << ckpt.theta.size() << '\n';
  write_values(out, ckpt.theta.flat());
  if (ckpt.adam) {
    const AdamState& a = *ckpt.adam;
    out << "adam " << a.step << ' ' << format_double(a.beta1) << ' ' << format_double(a.beta2) << ' '
        << format_double(a.delta) << '\n';
    out << "m\n";
    write_values(out, a.m);
    out << "v\n";
    write_values(out, a.v);
  }
  out << "end\n";
}

Checkpoint read_checkpoint(std::istream& in) {
  LineReader reader(in);
  const auto magic = reader.keyed(kMagic);
  if (magic.size() != 1 || reader.integer(magic[0]) != kFormatVersion) reader.fail("unsupported format version");

  std::vector<std::size_t> widths;
  for (const auto& w : reader.keyed("widths")) widths.push_back(static_cast<std::size_t>(reader.integer(w)));
  const double y_scale = reader.number(reader.single("y_scale"));
  Architecture arch = [&] {
    try {
      return Architecture(widths, y_scale);
    } catch (const std::invalid_argument& e) {
      reader.fail(e.what());
    }
  }();

  Checkpoint ckpt{PolicyParams(arch)};
  ckpt.seed = reader.integer(reader.single("seed"));
  ckpt.eta = reader.number(reader.single("eta"));
  ckpt.horizon = reader.number(reader.single("horizon"));
  ckpt.model = reader.single("model");
  if (ckpt.model != "gbm" && ckpt.model != "heston") reader.fail("unknown model '" + ckpt.model + "'");

  std::string line = reader.next();
  if (line.rfind("input_y ", 0) == 0) {
    ckpt.input_y = reader.number(std::string_view(line).substr(8));
    line = reader.next();
  }
  if (line.rfind("config_hash ", 0) != 0) reader.fail("expected 'config_hash'");
  ckpt.config_hash = line.substr(12);

  const auto cursor = reader.keyed("cursor");
  if (cursor.size() != 3) reader.fail("'cursor' takes three values");
  ckpt.steps_done = reader.integer(cursor[0]);
  ckpt.phase = static_cast<std::size_t>(reader.integer(cursor[1]));
  ckpt.step_in_phase = static_cast<std::size_t>(reader.integer(cursor[2]));

  const std::size_t count = static_cast<std::size_t>(reader.integer(reader.single("params")));
  if (count != param_count(arch)) reader.fail("parameter count does not match widths");
  ckpt.theta = PolicyParams(arch, reader.values(count));

  const std::string tail = reader.next();
  if (tail.rfind("adam", 0) == 0) {
    std::istringstream words(tail);
    std::string key, step, b1, b2, delta;
    words >> key >> step >> b1 >> b2 >> delta;
    AdamState adam(count);
    adam.step = reader.integer(step);
    adam.beta1 = reader.number(b1);
    adam.beta2 = reader.number(b2);
    adam.delta = reader.number(delta);
    if (reader.next() != "m") reader.fail("expected 'm'");
    adam.m = reader.values(count);
    if (reader.next() != "v") reader.fail("expected 'v'");
    adam.v = reader.values(count);
    ckpt.adam = std::move(adam);
    if (reader.next() != "end") reader.fail("expected 'end'");
  } else if (tail != "end") {
    reader.fail("expected 'adam' or 'end'");
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  write_checkpoint(out, ckpt);
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace annfolio
