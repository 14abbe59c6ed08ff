#include "wavesync/session_server.hpp"

#include <cmath>
#include <deque>
#include <iostream>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "wavesync/error.hpp"

namespace wavesync {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

json v2(Vec2 v) { return json::array({v.x, v.y}); }
json v4(const Vec4& v) { return json::array({v.v[0], v.v[1], v.v[2], v.v[3]}); }

json error_frame(std::string_view code, const std::string& message) {
  return {{"v", 1}, {"type", "error"}, {"code", code}, {"message", message}};
}

json malformed(const std::string& message) { return error_frame("MalformedMessage", message); }

bool finite_number(const json& v) { return v.is_number() && std::isfinite(v.get<double>()); }

/// The session always takes its input from the live adapter; a scenario that
/// names another operator keeps only its saturation limit.
OperatorSpec live_operator(const OperatorSpec& spec, std::shared_ptr<LiveAdapter> adapter) {
  LiveOperator live;
  live.adapter = std::move(adapter);
  if (const auto* l = std::get_if<LiveOperator>(&spec)) {
    live.hold_timeout = l->hold_timeout;
    live.u_max = l->u_max;
  } else if (const auto* p = std::get_if<ProportionalOperator>(&spec)) {
    live.u_max = p->u_max;
  } else if (const auto* s = std::get_if<ScriptedOperator>(&spec)) {
    live.u_max = s->u_max;
  }
  return live;
}

}  // namespace

void SessionConfig::validate() const {
  scenario.validate();
  if (!(feedback_rate > 0.0) || feedback_rate > 1.0 / scenario.dt + 1e-9) {
    throw Error(ErrorCode::kBadScenario, "field 'feedback_rate': must be in (0, 1/dt]");
  }
}

json state_message(const Scenario& scenario, const StepRecord& record, ViewMode view, double last_residual) {
  json msg{{"v", 1}, {"type", "state"}, {"t", record.t}, {"z", v2(record.z)}, {"qr", v2(scenario.q_r)}};
  const std::vector<Vec2> eta = biased_positions(record.states, scenario.biases);
  json eta_h = json::array();
  for (AgentId i : scenario.graph.accessible()) eta_h.push_back(v2(eta[i]));
  msg["eta_h"] = std::move(eta_h);
  json obstacles = json::array();
  for (const Obstacle& o : scenario.obstacles) obstacles.push_back({{"center", v2(o.center)}, {"radius", o.radius}});
  msg["obstacles"] = std::move(obstacles);
  if (view == ViewMode::kOperator) return msg;

  json robots = json::array();
  for (std::size_t i = 0; i < record.states.size(); ++i) {
    robots.push_back({{"id", i + 1},
                      {"q", v2(record.states[i].q)},
                      {"xi", v2(record.states[i].xi)},
                      {"eta", v2(eta[i])},
                      {"accessible", scenario.graph.is_accessible(static_cast<AgentId>(i))}});
  }
  msg["robots"] = std::move(robots);
  json waves = json::array();
  for (std::size_t e = 0; e < record.edges.size(); ++e) {
    const Edge& edge = scenario.graph.edges()[e];
    waves.push_back({{"i", edge.i + 1},
                     {"j", edge.j + 1},
                     {"s_plus", v4(record.edges[e].s_plus)},
                     {"s_minus", v4(record.edges[e].s_minus)}});
  }
  msg["waves"] = std::move(waves);
  double robots_sum = 0.0;
  double channels_sum = 0.0;
  for (double s : record.ledger.robot) robots_sum += s;
  for (double s : record.ledger.channel) channels_sum += s;
  msg["storage"] = {{"total", record.ledger.total},
                    {"robots", robots_sum},
                    {"channels", channels_sum},
                    {"energy", record.ledger.energy}};
  msg["residual"] = std::isfinite(last_residual) ? json(last_residual) : json(nullptr);
  return msg;
}

// ---------------------------------------------------------------------------
// Session

Session::Session(SessionConfig config) : config_(std::move(config)), adapter_(std::make_shared<LiveAdapter>()) {
  config_.validate();
  config_.scenario.op = live_operator(config_.scenario.op, adapter_);
  std::lock_guard lock(mutex_);
  running_ = config_.autostart;
  restart_locked();
}

void Session::restart_locked() {
  adapter_->clear();
  pending_.reset();
  last_accepted_.reset();
  RunOptions options;
  options.record_edges = config_.view == ViewMode::kDebug;
  stepper_ = std::make_unique<Stepper>(config_.scenario, options);

  StepRecord initial;
  initial.step = stepper_->world().step;
  initial.t = stepper_->world().t;
  initial.states = stepper_->world().states;
  initial.z = average_accessible(initial.states, config_.scenario.graph);
  publish_locked(initial);
}

void Session::publish_locked(const StepRecord& rec) {
  const auto& records = stepper_->log().records;
  const double residual =
      records.size() >= 2 ? records[records.size() - 2].residual : std::numeric_limits<double>::quiet_NaN();
  std::atomic_store(&state_, std::make_shared<const std::string>(
                                 state_message(config_.scenario, rec, config_.view, residual).dump()));
  ++version_;
}

void Session::flush_pending_locked() {
  if (!pending_) return;
  adapter_->submit({*pending_, stepper_->world().t, CommandSource::kLive});
  pending_.reset();
}

json Session::handle_message(const std::string& text, Clock::time_point wall) {
  json msg;
  try {
    msg = json::parse(text);
  } catch (const json::parse_error& e) {
    return malformed(std::string("not JSON: ") + e.what());
  }
  if (!msg.is_object()) return malformed("expected an object");
  if (msg.contains("v") && msg["v"] != 1) return malformed("unsupported protocol version");
  if (!msg.contains("type") || !msg["type"].is_string()) return malformed("missing 'type'");
  const std::string type = msg["type"].get<std::string>();

  std::lock_guard lock(mutex_);
  const double now = stepper_->world().t;
  if (type == "cmd") {
    const json* u = msg.contains("u") ? &msg["u"] : nullptr;
    if (!u || !u->is_array() || u->size() != 2 || !finite_number((*u)[0]) || !finite_number((*u)[1])) {
      return malformed("'u' must be [ux, uy] with finite numbers");
    }
    if (msg.contains("t") && !finite_number(msg["t"])) return malformed("'t' must be a number");
    const Vec2 cmd{(*u)[0].get<double>(), (*u)[1].get<double>()};
    json ack{{"v", 1}, {"type", "ack"}, {"of", "cmd"}, {"t", now}};
    const auto min_gap = std::chrono::duration<double>(1.0 / kMaxCommandRate);
    if (last_accepted_ && wall - *last_accepted_ < min_gap) {
      pending_ = cmd;
      ack["coalesced"] = true;
      ack["code"] = "RateLimited";
      return ack;
    }
    pending_.reset();
    last_accepted_ = wall;
    adapter_->submit({cmd, now, CommandSource::kLive});
    ack["coalesced"] = false;
    return ack;
  }
  if (type == "start") {
    running_ = true;
  } else if (type == "pause") {
    running_ = false;
  } else if (type == "reset") {
    restart_locked();
  } else {
    return malformed("unknown message type '" + type + "'");
  }
  return {{"v", 1}, {"type", "ack"}, {"of", type}, {"t", stepper_->world().t}};
}

bool Session::advance() {
  std::lock_guard lock(mutex_);
  if (!running_ || stepper_->finished()) return false;
  flush_pending_locked();
  const StepRecord& rec = stepper_->tick();
  publish_locked(rec);
  return true;
}

bool Session::running() const {
  std::lock_guard lock(mutex_);
  return running_;
}

bool Session::finished() const {
  std::lock_guard lock(mutex_);
  return stepper_->finished();
}

double Session::sim_time() const {
  std::lock_guard lock(mutex_);
  return stepper_->world().t;
}

std::shared_ptr<const std::string> Session::latest_state() const { return std::atomic_load(&state_); }

SessionRecord Session::record() const {
  std::lock_guard lock(mutex_);
  return make_record(config_.scenario, stepper_->log(), adapter_->history());
}

// ---------------------------------------------------------------------------
// Transport

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace {

class Peer : public std::enable_shared_from_this<Peer> {
 public:
  using Closed = std::function<void(const Peer*)>;

  Peer(tcp::socket socket, Session& session, bool rejected, Closed on_closed)
      : ws_(std::move(socket)), session_(session), rejected_(rejected), on_closed_(std::move(on_closed)) {}

  void start() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
  }

  /// Replaces any state frame still waiting; the newest snapshot wins.
  void offer_state(std::shared_ptr<const std::string> frame) {
    if (rejected_ || closed_) return;
    pending_state_ = std::move(frame);
    pump();
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    beast::error_code ignored;
    beast::get_lowest_layer(ws_).socket().close(ignored);
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return finish();
    if (rejected_) {
      control_.push_back(std::make_shared<const std::string>(
          error_frame("SecondOperatorRejected", "another operator is connected").dump()));
      return pump();
    }
    offer_state(session_.latest_state());
    read();
  }

  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->finish();
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      const json reply = self->session_.handle_message(text, Clock::now());
      self->control_.push_back(std::make_shared<const std::string>(reply.dump()));
      self->pump();
      self->read();
    });
  }

  void pump() {
    if (writing_ || closed_) return;
    std::shared_ptr<const std::string> frame;
    if (!control_.empty()) {
      frame = std::move(control_.front());
      control_.pop_front();
    } else if (pending_state_) {
      frame = std::move(pending_state_);
      pending_state_.reset();
    } else {
      if (rejected_) {
        ws_.async_close(websocket::close_code::policy_error,
                        [self = shared_from_this()](beast::error_code) { self->finish(); });
      }
      return;
    }
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(*frame), [self = shared_from_this(), frame](beast::error_code ec, std::size_t) {
      self->writing_ = false;
      if (ec) return self->finish();
      self->pump();
    });
  }

  void finish() {
    if (finished_) return;
    finished_ = true;
    closed_ = true;
    if (on_closed_) on_closed_(this);
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  Session& session_;
  bool rejected_;
  Closed on_closed_;
  std::deque<std::shared_ptr<const std::string>> control_;
  std::shared_ptr<const std::string> pending_state_;
  bool writing_ = false;
  bool closed_ = false;
  bool finished_ = false;
};

}  // namespace

struct SessionServer::Impl {
  explicit Impl(SessionConfig config)
      : session(std::move(config)), acceptor(ioc), timer(ioc), signals(ioc) {}

  Session session;
  net::io_context ioc;
  tcp::acceptor acceptor;
  net::steady_timer timer;
  net::signal_set signals;
  std::shared_ptr<Peer> operator_peer;
  std::uint64_t sent_version = 0;
  std::atomic<bool> stopping{false};
  std::thread stepping;

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      const bool rejected = operator_peer != nullptr;
      auto peer = std::make_shared<Peer>(std::move(socket), session, rejected, [this](const Peer* p) {
        if (operator_peer.get() == p) operator_peer.reset();
      });
      if (!rejected) {
        operator_peer = peer;
        sent_version = session.state_version();
      }
      peer->start();
      accept();
    });
  }

  void broadcast() {
    const auto period = std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>(1.0 / session.config().feedback_rate));
    timer.expires_after(period);
    timer.async_wait([this](beast::error_code ec) {
      if (ec) return;
      const std::uint64_t v = session.state_version();
      if (operator_peer && v != sent_version) {
        sent_version = v;
        operator_peer->offer_state(session.latest_state());
      }
      broadcast();
    });
  }

  void step_loop() {
    const auto dt = std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>(session.config().scenario.dt));
    auto next = Clock::now();
    while (!stopping.load()) {
      if (session.advance()) {
        if (session.config().paced) {
          next += dt;
          std::this_thread::sleep_until(next);
        }
      } else {
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
        next = Clock::now();
      }
    }
  }
};

SessionServer::SessionServer(SessionConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {
  const SessionConfig& cfg = impl_->session.config();
  beast::error_code ec;
  const tcp::endpoint endpoint(net::ip::make_address(cfg.host, ec), cfg.port);
  if (ec) throw Error(ErrorCode::kBadScenario, "field 'host': " + ec.message());
  impl_->acceptor.open(endpoint.protocol(), ec);
  if (!ec) impl_->acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) impl_->acceptor.bind(endpoint, ec);
  if (!ec) impl_->acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) {
    throw Error(ErrorCode::kPortInUse, cfg.host + ":" + std::to_string(cfg.port) + ": " + ec.message());
  }
}

SessionServer::~SessionServer() {
  stop();
  if (impl_->stepping.joinable()) impl_->stepping.join();
}

std::uint16_t SessionServer::port() const noexcept { return impl_->acceptor.local_endpoint().port(); }

Session& SessionServer::session() noexcept { return impl_->session; }

void SessionServer::run() {
  Impl& s = *impl_;
  if (s.session.config().handle_signals) {
    s.signals.add(SIGINT);
    s.signals.add(SIGTERM);
    s.signals.async_wait([this](beast::error_code ec, int) {
      if (!ec) stop();
    });
  }
  s.accept();
  s.broadcast();
  s.stepping = std::thread([&s] { s.step_loop(); });
  s.ioc.run();
  s.stopping = true;
  if (s.stepping.joinable()) s.stepping.join();
  if (s.operator_peer) s.operator_peer->close();
  if (const auto& path = s.session.config().record_path) save_record(s.session.record(), *path);
}

void SessionServer::stop() {
  impl_->stopping = true;
  impl_->ioc.stop();
}

}  // namespace wavesync
