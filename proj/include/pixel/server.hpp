#pragma once

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstring>
#include <deque>
#include <functional>
#include <iostream>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "pixel/engine.hpp"
#include "pixel/protocol.hpp"
#include "pixel/websocket.hpp"

namespace pixel {

struct ListenAddress {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

/// "host:port" or ":port"; an empty host binds all interfaces.
inline ListenAddress parse_listen_address(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) throw std::invalid_argument("listen address must be host:port");
  ListenAddress a;
  a.host = std::string(text.substr(0, colon));
  if (a.host.empty()) a.host = "0.0.0.0";
  const auto port_text = text.substr(colon + 1);
  if (port_text.empty() || port_text.size() > 5 ||
      port_text.find_first_not_of("0123456789") != std::string_view::npos) {
    throw std::invalid_argument("invalid port in listen address");
  }
  const unsigned long port = std::stoul(std::string(port_text));
  if (port > 65535) throw std::invalid_argument("port out of range");
  a.port = static_cast<std::uint16_t>(port);
  return a;
}

struct ServerConfig {
  ListenAddress listen;
  EngineConfig engine;
  std::optional<std::uint64_t> max_ticks;  // stop after this many ticks
  bool realtime = true;                    // pace ticks at tick_ms wall-clock
  std::size_t client_queue_capacity = 256;
  std::function<void(std::uint64_t tick, const LedPacket&)> led_sink;
  std::function<void(std::string_view)> log = [](std::string_view line) { std::cerr << line << '\n'; };
};

/// Session service: clients speak newline-delimited session messages over
/// TCP, or one message per text frame after a WebSocket upgrade. Inputs from
/// every client feed one engine; every tick's frame and mode go to all clients.
///
/// Threads: one engine thread, one accept thread, and a reader plus a writer
/// per client. The input FIFO and the per-client outbound queues are the only
/// shared state. A full outbound queue drops its oldest line, so a slow client
/// never stalls the tick loop.
class Server {
 public:
  explicit Server(ServerConfig cfg) : cfg_(std::move(cfg)) {}
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;
  ~Server() { stop(); }

  /// Binds, starts the loops and returns the bound port.
  std::uint16_t start() {
    listen_fd_ = open_listener(cfg_.listen);
    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
    running_ = true;
    engine_thread_ = std::thread([this] { engine_loop(); });
    accept_thread_ = std::thread([this] { accept_loop(); });
    return port_;
  }

  /// Blocks until the engine loop ends (max_ticks reached or stop()).
  void wait() {
    if (engine_thread_.joinable()) engine_thread_.join();
  }

  void stop() {
    running_ = false;
    if (engine_thread_.joinable()) engine_thread_.join();
    if (listen_fd_ >= 0) {
      ::shutdown(listen_fd_, SHUT_RDWR);
      ::close(listen_fd_);
      listen_fd_ = -1;
    }
    if (accept_thread_.joinable()) accept_thread_.join();
    std::list<std::shared_ptr<Client>> clients;
    {
      std::lock_guard lock(clients_mu_);
      clients.swap(clients_);
    }
    for (auto& c : clients) c->close_and_join();
  }

  std::uint16_t port() const { return port_; }
  std::uint64_t ticks() const { return ticks_done_.load(); }

  std::size_t client_count() {
    std::lock_guard lock(clients_mu_);
    reap_locked();
    return clients_.size();
  }

  /// Everything fed to the engine so far; replaying it reproduces the run.
  SessionLog session_log() const {
    std::lock_guard lock(log_mu_);
    return log_;
  }

  /// Inject an input as if a client had sent it.
  void push_input(InputMessage m) { inputs_.push(std::move(m)); }

 private:
  class Client {
   public:
    Client(int fd, std::size_t capacity, std::function<void(InputMessage)> on_input,
           std::function<void(std::string_view)> log)
        : fd_(fd), capacity_(capacity), on_input_(std::move(on_input)), log_(std::move(log)) {}

    void start() {
      reader_ = std::thread([this] { read_loop(); });
      writer_ = std::thread([this] { write_loop(); });
    }

    /// Queues one protocol line; drops the oldest queued line when full.
    void send_line(const std::string& line) {
      std::lock_guard lock(mu_);
      if (closed_) return;
      if (outbox_.size() >= capacity_) {
        outbox_.pop_front();
        ++dropped_;
      }
      outbox_.push_back(line);
      cv_.notify_one();
    }

    bool closed() {
      std::lock_guard lock(mu_);
      return closed_;
    }

    void close_and_join() {
      mark_closed();
      if (reader_.joinable()) reader_.join();
      if (writer_.joinable()) writer_.join();
      if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
      }
    }

   private:
    void mark_closed() {
      std::lock_guard lock(mu_);
      if (!closed_) {
        closed_ = true;
        ::shutdown(fd_, SHUT_RDWR);
      }
      cv_.notify_all();
    }

    bool send_all(std::string_view bytes) {
      std::lock_guard lock(send_mu_);
      while (!bytes.empty()) {
        const auto n = ::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        bytes.remove_prefix(static_cast<std::size_t>(n));
      }
      return true;
    }

    void write_loop() {
      for (;;) {
        std::string line;
        bool ws = false;
        {
          std::unique_lock lock(mu_);
          // A client that stays silent past the sniff window is a raw-line
          // listener; a browser sends its upgrade request immediately.
          if (!ready_ && !cv_.wait_until(lock, connected_at_ + kSniffWindow, [&] { return closed_ || ready_; })) {
            ready_ = true;
          }
          cv_.wait(lock, [&] { return closed_ || (!outbox_.empty() && ready_); });
          if (closed_) return;
          line = std::move(outbox_.front());
          outbox_.pop_front();
          ws = websocket_;
        }
        const std::string wire = ws ? ws::encode_frame(ws::Opcode::Text, line) : line + '\n';
        if (!send_all(wire)) {
          mark_closed();
          return;
        }
      }
    }

    void deliver(std::string_view line) {
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.find_first_not_of(" \t") == std::string_view::npos) return;
      try {
        auto input = as_input(parse_message(line));
        if (!input) {
          log_("dropped non-input message from client: " + std::string(line.substr(0, 200)));
          return;
        }
        on_input_(std::move(*input));
      } catch (const ParseError& e) {
        log_(std::string("dropped malformed message: ") + e.what() + ": " + e.line().substr(0, 200));
      }
    }

    void read_loop() {
      std::string pending;
      ws::FrameDecoder decoder;
      bool handshake_done = false;
      char buf[4096];
      for (;;) {
        const auto n = ::recv(fd_, buf, sizeof buf, 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) break;
        std::string_view chunk(buf, static_cast<std::size_t>(n));

        if (!handshake_done && transport_decided()) handshake_done = true;
        if (!handshake_done) {
          pending.append(chunk);
          chunk = {};
          if (pending.size() < 4 && std::string_view("GET ").starts_with(pending)) continue;
          if (pending.starts_with("GET ")) {
            const auto end = pending.find("\r\n\r\n");
            if (end == std::string::npos) {
              if (pending.size() > 16384) break;
              continue;
            }
            auto response = ws::handshake_response(std::string_view(pending).substr(0, end + 4));
            if (!response || !send_all(*response)) break;
            decoder.feed(std::string_view(pending).substr(end + 4));
            pending.clear();
            set_ready(true);
          } else {
            set_ready(false);
          }
          handshake_done = true;
        }

        if (is_websocket()) {
          decoder.feed(chunk);
          try {
            while (auto m = decoder.next()) {
              if (m->opcode == ws::Opcode::Close) {
                send_all(ws::encode_frame(ws::Opcode::Close, ""));
                mark_closed();
                return;
              }
              if (m->opcode == ws::Opcode::Ping) {
                send_all(ws::encode_frame(ws::Opcode::Pong, m->payload));
                continue;
              }
              if (m->opcode == ws::Opcode::Text) deliver(m->payload);
            }
          } catch (const ws::ProtocolViolation& e) {
            log_(std::string("websocket protocol error: ") + e.what());
            break;
          }
        } else {
          pending.append(chunk);
          std::size_t start = 0;
          for (auto nl = pending.find('\n'); nl != std::string::npos; nl = pending.find('\n', start)) {
            deliver(std::string_view(pending).substr(start, nl - start));
            start = nl + 1;
          }
          pending.erase(0, start);
          if (pending.size() > (1u << 20)) {
            log_("client line exceeds 1 MiB, disconnecting");
            break;
          }
        }
      }
      mark_closed();
    }

    void set_ready(bool websocket) {
      std::lock_guard lock(mu_);
      websocket_ = websocket;
      ready_ = true;
      cv_.notify_all();
    }

    bool transport_decided() {
      std::lock_guard lock(mu_);
      return ready_;
    }

    bool is_websocket() {
      std::lock_guard lock(mu_);
      return websocket_;
    }

    static constexpr auto kSniffWindow = std::chrono::milliseconds(250);

    int fd_;
    std::chrono::steady_clock::time_point connected_at_ = std::chrono::steady_clock::now();
    std::mutex send_mu_;
    std::size_t capacity_;
    std::function<void(InputMessage)> on_input_;
    std::function<void(std::string_view)> log_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<std::string> outbox_;
    std::size_t dropped_ = 0;
    bool closed_ = false;
    bool ready_ = false;  // transport known: raw lines or upgraded websocket
    bool websocket_ = false;
    std::thread reader_;
    std::thread writer_;
  };

  static int open_listener(const ListenAddress& addr) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    const auto port = std::to_string(addr.port);
    if (::getaddrinfo(addr.host.c_str(), port.c_str(), &hints, &res) != 0 || res == nullptr) {
      throw std::runtime_error("cannot resolve listen address " + addr.host);
    }
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, &::freeaddrinfo);
    const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd < 0) throw std::runtime_error("socket() failed");
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, res->ai_addr, res->ai_addrlen) != 0 || ::listen(fd, 16) != 0) {
      const std::string err = std::strerror(errno);
      ::close(fd);
      throw std::runtime_error("cannot listen on " + addr.host + ":" + port + ": " + err);
    }
    return fd;
  }

  void accept_loop() {
    while (running_) {
      const int fd = ::accept(listen_fd_, nullptr, nullptr);
      if (fd < 0) {
        if (errno == EINTR) continue;
        return;
      }
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      auto client = std::make_shared<Client>(
          fd, cfg_.client_queue_capacity, [this](InputMessage m) { inputs_.push(std::move(m)); }, cfg_.log);
      client->start();
      std::lock_guard lock(clients_mu_);
      clients_.push_back(std::move(client));
    }
  }

  void reap_locked() {
    for (auto it = clients_.begin(); it != clients_.end();) {
      if ((*it)->closed()) {
        (*it)->close_and_join();
        it = clients_.erase(it);
      } else {
        ++it;
      }
    }
  }

  void broadcast(const std::string& frame_line, const std::string& mode_line) {
    std::lock_guard lock(clients_mu_);
    reap_locked();
    for (auto& c : clients_) {
      c->send_line(frame_line);
      c->send_line(mode_line);
    }
  }

  void engine_loop() {
    Engine engine(cfg_.engine);
    {
      std::lock_guard lock(log_mu_);
      log_.seed = cfg_.engine.seed;
      log_.ticks = 0;
    }
    auto next = std::chrono::steady_clock::now();
    const auto period = std::chrono::milliseconds(cfg_.engine.tick_ms);
    while (running_ && (!cfg_.max_ticks || engine.ticks() < *cfg_.max_ticks)) {
      const std::uint64_t tick = engine.ticks();
      auto inputs = inputs_.drain(tick);
      const Frame frame = engine.tick(inputs);
      const EngineMode mode = engine.mode();
      {
        std::lock_guard lock(log_mu_);
        for (auto& in : inputs) log_.records.push_back({tick, std::move(in)});
        log_.ticks = engine.ticks();
      }
      msg::ModeUpdate mode_msg{tick, std::string(to_string(mode.kind)), std::nullopt};
      if (mode.kind == ModeKind::ScoreScroll) mode_msg.remaining = mode.remaining;
      broadcast(emit_message(msg::FrameUpdate{tick, frame}), emit_message(mode_msg));
      if (cfg_.led_sink) cfg_.led_sink(tick, encode_frame(frame));
      ticks_done_ = engine.ticks();
      if (cfg_.realtime) {
        next += period;
        std::this_thread::sleep_until(next);
      }
    }
  }

  ServerConfig cfg_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{false};
  std::atomic<std::uint64_t> ticks_done_{0};
  std::thread engine_thread_;
  std::thread accept_thread_;
  std::mutex clients_mu_;
  std::list<std::shared_ptr<Client>> clients_;
  InputQueue inputs_;
  mutable std::mutex log_mu_;
  SessionLog log_;
};

}  // namespace pixel
