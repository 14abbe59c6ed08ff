#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "wavesync/scenario.hpp"
#include "wavesync/session_record.hpp"
#include "wavesync/simulator.hpp"

namespace wavesync {

enum class ViewMode { kOperator, kDebug };

inline constexpr double kDefaultFeedbackRate = 30.0;
inline constexpr double kMaxCommandRate = 200.0;

struct SessionConfig {
  Scenario scenario;
  std::uint16_t port = 8765;  ///< 0 picks a free port
  std::string host = "127.0.0.1";
  double feedback_rate = kDefaultFeedbackRate;
  ViewMode view = ViewMode::kOperator;
  std::optional<std::filesystem::path> record_path;
  bool autostart = false;     ///< step without waiting for a "start" message
  bool paced = true;          ///< false steps as fast as possible (tests)
  bool handle_signals = false;  ///< stop on SIGINT / SIGTERM

  /// Throws BadScenario if the feedback rate exceeds the step rate.
  void validate() const;
};

/// Transport-free core of a live session: the stepping state, the command
/// path and the feedback payloads. The stepping thread calls `advance`; the
/// network side calls `handle_message` and `latest_state`.
class Session {
 public:
  explicit Session(SessionConfig config);

  /// Validates one inbound text frame and applies it. Returns the reply frame:
  /// an ack, or an error frame naming MalformedMessage. Commands arriving
  /// faster than kMaxCommandRate are held and coalesced to the newest; the ack
  /// then carries "coalesced": true. `wall` is the receive time.
  nlohmann::json handle_message(const std::string& text, std::chrono::steady_clock::time_point wall);

  /// Takes one step if the session is running. Returns false if it did not.
  bool advance();
  [[nodiscard]] bool running() const;
  [[nodiscard]] bool finished() const;
  [[nodiscard]] double sim_time() const;

  /// Newest completed-step feedback frame, serialized.
  [[nodiscard]] std::shared_ptr<const std::string> latest_state() const;
  /// Sequence number of latest_state(), bumped after every step.
  [[nodiscard]] std::uint64_t state_version() const noexcept { return version_.load(); }

  /// Record of everything since the last reset.
  [[nodiscard]] SessionRecord record() const;
  [[nodiscard]] const SessionConfig& config() const noexcept { return config_; }

 private:
  void restart_locked();
  void publish_locked(const StepRecord& rec);
  void flush_pending_locked();

  SessionConfig config_;
  std::shared_ptr<LiveAdapter> adapter_;
  mutable std::mutex mutex_;  ///< guards everything below
  std::unique_ptr<Stepper> stepper_;
  bool running_ = false;
  std::optional<Vec2> pending_;
  std::optional<std::chrono::steady_clock::time_point> last_accepted_;
  std::shared_ptr<const std::string> state_;
  std::atomic<std::uint64_t> version_{0};
};

/// Operator feedback frame for one record. Debug view adds robots, waves,
/// storage and residual.
nlohmann::json state_message(const Scenario& scenario, const StepRecord& record, ViewMode view,
                             double last_residual);

/// Websocket host for one Session: one operator connection at a time, a
/// stepping thread paced to wall clock, and a broadcaster sending the latest
/// snapshot at the feedback rate (older snapshots are dropped, never queued).
class SessionServer {
 public:
  /// Binds the port; throws PortInUse if it is taken.
  explicit SessionServer(SessionConfig config);
  ~SessionServer();
  SessionServer(const SessionServer&) = delete;
  SessionServer& operator=(const SessionServer&) = delete;

  [[nodiscard]] std::uint16_t port() const noexcept;
  /// Serves until stop() is called. Writes the session record on return if
  /// the config names a path.
  void run();
  /// Safe from any thread or a signal-watching thread.
  void stop();

  [[nodiscard]] Session& session() noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace wavesync
