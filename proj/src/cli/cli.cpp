// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "evomon/cli/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "evomon/common/error.hpp"
#include "evomon/common/fs.hpp"
#include "evomon/embedding/evolution.hpp"
#include "evomon/embedding/layout_json.hpp"
#include "evomon/ingest/manifest.hpp"
#include "evomon/ingest/simulator.hpp"
#include "evomon/ingest/snapshot.hpp"
#include "evomon/metrics/fid.hpp"
#include "evomon/service/http.hpp"
#include "evomon/service/monitor.hpp"

namespace fs = std::filesystem;

namespace evomon::cli {

namespace {

std::atomic<bool> g_shutdown{false};

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

struct ServeArgs {
  std::string data_root;
  std::string listen = "127.0.0.1:8080";
  int workers = 0;
  int poll_ms = 250;
};

struct EmbedArgs {
  std::string run_dir;
  std::string mode;
  std::string out_path;
  std::optional<std::uint64_t> seed;
};

struct FidArgs {
  std::string real_path, gen_path;
  std::size_t dims = 0;
  std::string format = "text";
};

struct ValidateArgs {
  std::string run_dir;
  std::string format = "text";
};

std::pair<std::string, int> split_listen(const std::string& listen) {
  auto colon = listen.rfind(':');
  if (colon == std::string::npos) throw ValidationError("--listen must be host:port");
  int port = -1;
  try {
    port = std::stoi(listen.substr(colon + 1));
  } catch (const std::exception&) {
  }
  if (port < 0 || port > 65535) throw ValidationError("--listen port must be 0-65535");
  return {listen.substr(0, colon), port};
}

int cmd_serve(const ServeArgs& a, std::ostream& out, std::ostream& err) {
  if (!fs::is_directory(a.data_root)) {
    err << "error: data root '" << a.data_root << "' is not a directory\n";
    return kUsageError;
  }
  auto [host, port] = split_listen(a.listen);

  // Signals are taken synchronously by the waiter thread below; every thread
  // started from here inherits the mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  g_shutdown = false;

  service::ServiceOptions options;
  options.data_root = a.data_root;
  options.run.embed_threads = a.workers;
  options.run.poll_interval = std::chrono::milliseconds(a.poll_ms);
  service::MonitorService monitor(options);
  service::HttpServer server(monitor);
  int bound = 0;
  try {
    bound = server.bind(host, port);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  for (const auto& id : monitor.discover()) out << "opened run " << id << "\n";
  out << "listening on " << host << ":" << bound << std::endl;

  std::atomic<bool> done{false};
  std::thread waiter([&] {
    const timespec tick{0, 100'000'000};
    while (!done) {
      int sig = sigtimedwait(&signals, nullptr, &tick);
      if (sig > 0 || g_shutdown.exchange(false)) {
        server.stop();
        return;
      }
    }
  });
  server.listen();
  done = true;
  waiter.join();
  monitor.stop();
  out << "shut down\n";
  return kOk;
}

std::vector<fs::path> snapshot_dirs(const fs::path& run_dir) {
  std::map<std::int64_t, fs::path> dirs;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(run_dir / "snapshots", ec))
    if (auto iter = ingest::parse_snapshot_dir_name(entry.path().filename().string()); iter && entry.is_directory())
      dirs.emplace(*iter, entry.path());
  std::vector<fs::path> out;
  for (auto& [iter, dir] : dirs) out.push_back(dir);
  return out;
}

int cmd_embed(const EmbedArgs& a, std::ostream& out, std::ostream& err) {
  auto manifest = ingest::read_manifest(a.run_dir);
  auto config = manifest.embedding;
  if (!a.mode.empty()) config.mode = embedding::mode_from_string(a.mode);
  if (a.seed) config.seed = *a.seed;

  std::vector<ingest::Snapshot> snapshots;
  bool invalid = false;
  for (const auto& dir : snapshot_dirs(a.run_dir)) {
    auto report = ingest::validate_snapshot(dir, manifest);
    if (report.status == ingest::SnapshotStatus::incomplete) {
      err << dir.filename().string() << ": incomplete, skipped\n";
    } else if (report.status == ingest::SnapshotStatus::invalid) {
      invalid = true;
      for (const auto& i : report.issues) err << dir.filename().string() << ": " << i.to_string() << "\n";
    } else {
      snapshots.push_back(std::move(*report.snapshot));
    }
  }
  if (invalid) return kUsageError;
  if (snapshots.empty()) {
    err << "error: no complete snapshots in " << a.run_dir << "\n";
    return kUsageError;
  }

  const auto& source = manifest.resolved_primary_source();
  embedding::EvolutionLayout layout;
  if (config.mode == embedding::Mode::batch) {
    std::vector<FeatureMatrix> xs;
    std::vector<std::int64_t> iterations;
    for (const auto& s : snapshots) {
      xs.push_back(s.feature(source));
      iterations.push_back(s.training_iteration);
    }
    layout = embedding::batch_embed(xs, config, iterations);
  } else {
    for (std::size_t t = 0; t < snapshots.size(); ++t) {
      const auto& s = snapshots[t];
      layout = t == 0 ? embedding::embed_first(s.feature(source), config, s.training_iteration)
                      : embedding::append_iteration(layout, s.feature(source), config, s.training_iteration);
    }
  }
  write_file_atomic(a.out_path, embedding::export_layout(layout));
  out << "bands " << layout.bands.size() << "\n";
  out << "config_hash " << layout.config_hash << "\n";
  return kOk;
}

FeatureMatrix load_f32(const std::string& path, std::size_t dims, const std::string& name) {
  auto bytes = read_file(path);
  if (bytes.size() % (4 * dims) != 0)
    throw ValidationError(path + ": " + std::to_string(bytes.size()) + " bytes is not a multiple of 4*dims = " +
                          std::to_string(4 * dims));
  auto values = decode_f32_le(bytes);
  const std::size_t rows = values.size() / dims;
  std::vector<std::string> ids(rows);
  for (std::size_t i = 0; i < rows; ++i) ids[i] = std::to_string(i);
  FeatureMatrix m(std::move(ids), dims, std::move(values), name);
  m.validate();
  return m;
}

int cmd_fid(const FidArgs& a, std::ostream& out) {
  if (a.dims == 0) throw ValidationError("--dims must be positive");
  auto real = load_f32(a.real_path, a.dims, "real");
  auto gen = load_f32(a.gen_path, a.dims, "gen");
  auto result = metrics::fid_detailed(real, gen);
  if (a.format == "json") {
    out << nlohmann::json{{"fid", result.value},
                          {"dims", a.dims},
                          {"real_rows", real.rows()},
                          {"gen_rows", gen.rows()},
                          {"epsilon_real", result.epsilon_real},
                          {"epsilon_gen", result.epsilon_gen}}
               .dump()
        << "\n";
  } else {
    out << fixed6(result.value) << "\n";
  }
  return kOk;
}

int cmd_simulate(const ingest::SimulationSpec& spec, const std::string& out_dir, std::ostream& out) {
  auto manifest = ingest::simulate_run(out_dir, spec);
  out << "wrote run " << manifest.run_id << " (" << spec.scenario << ", T=" << spec.snapshots
      << ", N=" << spec.instances << ", D=" << spec.dims << ") to " << out_dir << "\n";
  return kOk;
}

int cmd_validate(const ValidateArgs& a, std::ostream& out) {
  auto manifest = ingest::read_manifest(a.run_dir);
  bool all_ok = true;
  auto doc = nlohmann::json::array();
  for (const auto& dir : snapshot_dirs(a.run_dir)) {
    auto report = ingest::validate_snapshot(dir, manifest);
    const auto name = dir.filename().string();
    std::string status = report.status == ingest::SnapshotStatus::ok           ? "pass"
                         : report.status == ingest::SnapshotStatus::incomplete ? "incomplete"
                                                                               : "fail";
    if (report.status == ingest::SnapshotStatus::invalid) all_ok = false;
    if (a.format == "json") {
      auto issues = nlohmann::json::array();
      if (report.status == ingest::SnapshotStatus::invalid)
        for (const auto& i : report.issues) {
          nlohmann::json ji = {{"file", i.file}, {"rule", i.rule}, {"message", i.message}};
          ji["row"] = i.row ? nlohmann::json(*i.row) : nlohmann::json(nullptr);
          issues.push_back(std::move(ji));
        }
      doc.push_back({{"snapshot", name}, {"status", status}, {"issues", std::move(issues)}});
    } else {
      out << name << " " << status << "\n";
      if (report.status == ingest::SnapshotStatus::invalid)
        for (const auto& i : report.issues) out << "  " << i.to_string() << "\n";
    }
  }
  if (a.format == "json") out << nlohmann::json{{"run_id", manifest.run_id}, {"ok", all_ok}, {"snapshots", doc}}.dump() << "\n";
  return all_ok ? kOk : kUsageError;
}

}  // namespace

void request_shutdown() { g_shutdown = true; }

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monitor the training evolution of generative models", "evomon"};
  app.require_subcommand(1);

  ServeArgs serve;
  auto* s = app.add_subcommand("serve", "Run the monitor service");
  s->add_option("--data-root", serve.data_root, "Directory holding one subdirectory per run")->required();
  s->add_option("--listen", serve.listen, "host:port to listen on (port 0 picks one)")->capture_default_str();
  s->add_option("--workers", serve.workers, "OpenMP threads per run worker (0 = default)")->capture_default_str();
  s->add_option("--poll-ms", serve.poll_ms, "Snapshot directory poll interval")->capture_default_str();

  EmbedArgs embed;
  std::uint64_t seed_override = 0;
  auto* e = app.add_subcommand("embed", "Embed every snapshot of a run offline");
  e->add_option("--run-dir", embed.run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  e->add_option("--mode", embed.mode, "progressive or batch (default: manifest)")
      ->check(CLI::IsMember({"progressive", "batch"}));
  e->add_option("--out", embed.out_path, "Layout JSON output path")->required();
  auto* seed_opt = e->add_option("--seed", seed_override, "Override the manifest seed");

  FidArgs fid;
  auto* f = app.add_subcommand("fid", "Frechet distance between two float32 feature files");
  f->add_option("--real", fid.real_path, "Real features (.f32)")->required()->check(CLI::ExistingFile);
  f->add_option("--gen", fid.gen_path, "Generated features (.f32)")->required()->check(CLI::ExistingFile);
  f->add_option("--dims", fid.dims, "Feature dimensionality")->required();
  f->add_option("--format", fid.format, "text or json")->check(CLI::IsMember({"text", "json"}));

  ingest::SimulationSpec sim;
  std::string sim_out;
  bool no_thumbs = false;
  auto* m = app.add_subcommand("simulate", "Write a synthetic run directory");
  m->add_option("--scenario", sim.scenario, "split, converge or bias")->capture_default_str();
  m->add_option("-T,--snapshots", sim.snapshots, "Number of snapshots")->capture_default_str();
  m->add_option("-N,--instances", sim.instances, "Instances per snapshot")->capture_default_str();
  m->add_option("-D,--dims", sim.dims, "Feature dimensionality")->capture_default_str();
  m->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  m->add_option("--cadence", sim.cadence_n, "Training iterations between snapshots")->capture_default_str();
  m->add_option("--run-id", sim.run_id, "Run id (default sim-<scenario>-<seed>)");
  m->add_option("--out", sim_out, "Output run directory")->required();
  m->add_flag("--no-thumbnails", no_thumbs, "Skip placeholder thumbnails");

  ValidateArgs validate;
  auto* v = app.add_subcommand("validate", "Check every snapshot of a run directory");
  v->add_option("--run-dir", validate.run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  v->add_option("--format", validate.format, "text or json")->check(CLI::IsMember({"text", "json"}));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    int code = app.exit(ex, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*s) return cmd_serve(serve, out, err);
    if (*e) {
      if (*seed_opt) embed.seed = seed_override;
      return cmd_embed(embed, out, err);
    }
    if (*f) return cmd_fid(fid, out);
    if (*m) {
      sim.thumbnails = !no_thumbs;
      return cmd_simulate(sim, sim_out, out);
    }
    if (*v) return cmd_validate(validate, out);
  } catch (const ValidationError& ex) {
    err << "error: " << ex.what() << "\n";
    return kUsageError;
  } catch (const ConfigError& ex) {
    err << "error: " << ex.what() << "\n";
    return kUsageError;
  } catch (const NotFoundError& ex) {
    err << "error: " << ex.what() << "\n";
    return kUsageError;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace evomon::cli
