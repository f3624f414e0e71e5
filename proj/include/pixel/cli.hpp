#pragma once

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "pixel/engine.hpp"
#include "pixel/protocol.hpp"
#include "pixel/server.hpp"

namespace pixel {

namespace cli_detail {

inline std::atomic<bool> g_interrupted{false};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline void write_log(const std::string& path, const SessionLog& log) {
  std::ostringstream ss;
  write_session_log(ss, log);
  write_file(path, ss.str());
}

/// Appends one LED packet per tick to a binary file.
class LedFileSink {
 public:
  explicit LedFileSink(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write " + path);
  }
  void write(const LedPacket& p) {
    out_.write(reinterpret_cast<const char*>(p.data()), static_cast<std::streamsize>(p.size()));
    out_.flush();
  }

 private:
  std::ofstream out_;
};

}  // namespace cli_detail

/// Entry point of the `pixel` tool. Returns the process exit status.
///
///   serve  --listen <addr> --seed <u64>
///   run    --script <file> --ticks <n> --seed <u64> --ascii <out>
///   replay --log <file> [--assert-golden <frames file>]
///   encode --ascii <in> --out <bin>
///
/// --seed falls back to $PIXEL_SEED, then 0.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  using namespace cli_detail;

  CLI::App app{"PIXEL light installation simulator", "pixel"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "RNG seed")->envname("PIXEL_SEED");
  };

  auto* serve = app.add_subcommand("serve", "Run the interactive service");
  std::string listen = "127.0.0.1:7777";
  std::optional<std::uint64_t> serve_ticks;
  std::string serve_led;
  std::string serve_log;
  serve->add_option("--listen", listen, "host:port to listen on")->capture_default_str();
  add_seed(serve);
  serve->add_option("--ticks", serve_ticks, "Stop after this many ticks");
  serve->add_option("--led-out", serve_led, "Append LED packets to this file");
  serve->add_option("--log", serve_log, "Write the session log here on exit");

  auto* run = app.add_subcommand("run", "Headless scripted run");
  std::string script;
  std::uint64_t ticks = 0;
  std::string ascii_out;
  std::string run_log;
  std::string run_led;
  run->add_option("--script", script, "Input script (session log grammar)");
  run->add_option("--ticks", ticks, "Number of ticks")->required();
  add_seed(run);
  run->add_option("--ascii", ascii_out, "Write the ASCII frame dump here");
  run->add_option("--log", run_log, "Record the session log here");
  run->add_option("--led-out", run_led, "Write LED packets here");

  auto* rep = app.add_subcommand("replay", "Replay a recorded session");
  std::string replay_log;
  std::string golden;
  std::string replay_ascii;
  rep->add_option("--log", replay_log, "Session log")->required();
  rep->add_option("--assert-golden", golden, "Compare against this ASCII frame dump");
  rep->add_option("--ascii", replay_ascii, "Write the ASCII frame dump here");

  auto* enc = app.add_subcommand("encode", "Encode one ASCII frame as an LED packet");
  std::string enc_in;
  std::string enc_out;
  enc->add_option("--ascii", enc_in, "ASCII frame (10 lines of 15 O/R/B/P)")->required();
  enc->add_option("--out", enc_out, "Output packet file")->required();

  std::vector<const char*> argv;
  argv.push_back("pixel");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return e.get_exit_code() != 0 ? e.get_exit_code() : 2;
  }

  try {
    if (*run) {
      SessionLog script_log;
      if (!script.empty()) {
        std::ifstream in(script);
        if (!in) throw std::runtime_error("cannot open " + script);
        script_log = read_session_log(in, {.require_header = false, .check_version = true});
      }
      EngineConfig cfg;
      cfg.seed = seed;
      ScriptSource source(script_log.records);
      auto result = run_session(cfg, source, ticks);
      if (!ascii_out.empty()) write_file(ascii_out, ascii_dump(result.frames));
      if (!run_log.empty()) write_log(run_log, result.log);
      if (!run_led.empty()) {
        LedFileSink sink(run_led);
        for (const auto& f : result.frames) sink.write(encode_frame(f));
      }
      out << "ran " << result.frames.size() << " ticks, seed " << seed << ", final mode "
          << to_string(result.modes.empty() ? ModeKind::AttractCreature : result.modes.back().kind) << '\n';
      return 0;
    }

    if (*rep) {
      std::ifstream in(replay_log);
      if (!in) throw std::runtime_error("cannot open " + replay_log);
      const auto log = read_session_log(in);
      const auto frames = replay(log, EngineConfig{});
      if (!replay_ascii.empty()) write_file(replay_ascii, ascii_dump(frames));
      if (!golden.empty()) {
        const auto expected = parse_ascii_dump(read_file(golden));
        const std::size_t common = std::min(expected.size(), frames.size());
        for (std::size_t i = 0; i < common; ++i) {
          if (expected[i] != frames[i]) {
            err << "golden mismatch at tick " << i << "\nexpected:\n"
                << to_ascii(expected[i]) << "actual:\n" << to_ascii(frames[i]);
            return 1;
          }
        }
        if (expected.size() != frames.size()) {
          err << "golden mismatch at tick " << common << ": golden has " << expected.size()
              << " frames, replay produced " << frames.size() << '\n';
          return 1;
        }
        out << "golden match: " << frames.size() << " frames\n";
      } else {
        out << "replayed " << frames.size() << " ticks\n";
      }
      return 0;
    }

    if (*enc) {
      const auto frame = frame_from_ascii(read_file(enc_in));
      const auto packet = encode_frame(frame);
      write_file(enc_out, std::string_view(reinterpret_cast<const char*>(packet.data()), packet.size()));
      return 0;
    }

    if (*serve) {
      ServerConfig cfg;
      cfg.listen = parse_listen_address(listen);
      cfg.engine.seed = seed;
      cfg.max_ticks = serve_ticks;
      std::unique_ptr<LedFileSink> sink;
      if (!serve_led.empty()) {
        sink = std::make_unique<LedFileSink>(serve_led);
        cfg.led_sink = [&sink](std::uint64_t, const LedPacket& p) { sink->write(p); };
      }
      Server server(cfg);
      const auto port = server.start();
      out << "listening on " << cfg.listen.host << ":" << port << " (seed " << seed << ")" << std::endl;
      g_interrupted = false;
      std::signal(SIGINT, [](int) { g_interrupted = true; });
      std::signal(SIGTERM, [](int) { g_interrupted = true; });
      while (!g_interrupted && (!serve_ticks || server.ticks() < *serve_ticks)) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
      }
      server.stop();
      if (!serve_log.empty()) write_log(serve_log, server.session_log());
      out << "stopped after " << server.ticks() << " ticks" << std::endl;
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace pixel
