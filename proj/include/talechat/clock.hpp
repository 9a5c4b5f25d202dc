#pragma once

#include <atomic>
#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace talechat {

using Instant = std::chrono::sys_seconds;

/// Time source handed to everything that stamps records.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual Instant now() = 0;
};

class SystemClock final : public Clock {
 public:
  Instant now() override { return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()); }
};

/// Starts at `start` and advances by `step` after every reading.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(Instant start, std::chrono::seconds step = std::chrono::seconds{0})
      : seconds_(start.time_since_epoch().count()), step_(step.count()) {}

  Instant now() override { return Instant{std::chrono::seconds{seconds_.fetch_add(step_)}}; }
  void set(Instant t) { seconds_ = t.time_since_epoch().count(); }
  void advance(std::chrono::seconds d) { seconds_ += d.count(); }

 private:
  std::atomic<long long> seconds_;
  long long step_;
};

/// "DD/MM/YYYY HH:MM:SS", UTC.
std::string format_log_timestamp(Instant t);
std::optional<Instant> parse_log_timestamp(std::string_view s);

/// "YYYY-MM-DDTHH:MM:SSZ".
std::string format_iso_timestamp(Instant t);
std::optional<Instant> parse_iso_timestamp(std::string_view s);

/// Builds an instant from a UTC calendar date and time of day.
Instant make_instant(int year, unsigned month, unsigned day, int hour = 0, int minute = 0, int second = 0);

}  // namespace talechat
