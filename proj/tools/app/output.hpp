#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <annfolio/export.hpp>

namespace annfolio::app {

/// Fixed layout under the output root.
struct OutputLayout {
  std::filesystem::path root;

  std::filesystem::path calibration() const { return root / "calibration"; }
  std::filesystem::path checkpoints() const { return root / "checkpoints"; }
  std::filesystem::path logs() const { return root / "logs"; }
  std::filesystem::path reports() const { return root / "reports"; }
  std::filesystem::path profiles() const { return root / "profiles"; }

  /// Creates `root` and the named subdirectory.
  std::filesystem::path ensure(const std::filesystem::path& subdir) const;
};

/// Writes through a temporary file and renames, so readers never see a
/// half-written file and a failed command leaves no partial output.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Timing and identity of one command, written next to an output file as
/// <file>.meta.json. This is the only place wall-clock values appear.
struct RunInfo {
  std::string command;
  Provenance provenance;
  std::chrono::system_clock::time_point started = std::chrono::system_clock::now();
  std::chrono::steady_clock::time_point started_steady = std::chrono::steady_clock::now();
};

void write_meta(const std::filesystem::path& output_file, const RunInfo& run);

/// Exclusive ownership of an output directory for the lifetime of the object.
/// Fails if another process holds the lock.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
};

/// "# config_hash=<h> seed=<s>" line for scripts and text reports.
std::string provenance_comment(const Provenance& provenance);

/// Label used in per-eta file names: eta_1, eta_0.5, ...
std::string eta_label(double eta);

}  // namespace annfolio::app
