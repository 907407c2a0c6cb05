#include "output.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace annfolio::app {

std::filesystem::path OutputLayout::ensure(const std::filesystem::path& subdir) const {
  std::filesystem::create_directories(subdir);
  return subdir;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

std::string iso_utc(std::chrono::system_clock::time_point tp) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

void write_meta(const std::filesystem::path& output_file, const RunInfo& run) {
  const auto now = std::chrono::system_clock::now();
  const double elapsed =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - run.started_steady).count();
  nlohmann::json meta{
      {"file", output_file.filename().string()},
      {"command", run.command},
      {"config_hash", run.provenance.config_hash},
      {"seed", run.provenance.seeds},
      {"started_utc", iso_utc(run.started)},
      {"finished_utc", iso_utc(now)},
      {"elapsed_ms", elapsed},
  };
  std::filesystem::path meta_path = output_file;
  meta_path += ".meta.json";
  write_file_atomic(meta_path, meta.dump(2) + "\n");
}

DirectoryLock::DirectoryLock(const std::filesystem::path& dir) : path_(dir / ".annfolio.lock") {
  std::filesystem::create_directories(dir);
  fd_ = ::open(path_.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
  if (fd_ < 0) throw std::runtime_error("cannot open lock file " + path_.string() + ": " + std::strerror(errno));
  // flock is released by the kernel if the process dies, so a crash never
  // leaves the directory locked.
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw std::runtime_error("output directory " + dir.string() + " is in use by another training run (" +
                             path_.string() + ")");
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  if (::ftruncate(fd_, 0) == 0) {
    [[maybe_unused]] const auto n = ::write(fd_, pid.data(), pid.size());
  }
}

DirectoryLock::~DirectoryLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

std::string provenance_comment(const Provenance& provenance) {
  return "# config_hash=" + provenance.config_hash + " seed=" + provenance.seeds;
}

std::string eta_label(double eta) { return "eta_" + format_double(eta); }

}  // namespace annfolio::app
