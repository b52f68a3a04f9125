// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include "evomon/cli/cli.hpp"
#include "evomon/common/fs.hpp"
#include "evomon/ingest/simulator.hpp"
#include "evomon/ingest/snapshot.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

namespace fs = std::filesystem;
using namespace evomon;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

void write_f32(const fs::path& p, const std::vector<float>& v) { write_file(p, encode_f32_le(v)); }

std::string simulate(const TempDir& tmp, const std::string& scenario, const std::string& name = "run") {
  auto dir = (tmp / name).string();
  auto r = run({"simulate", "--scenario", scenario, "-T", "4", "-N", "45", "-D", "5", "--seed", "3", "--out", dir});
  REQUIRE(r.code == 0);
  return dir;
}

int free_port() {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return ntohs(addr.sin_port);
}

}  // namespace

TEST_CASE("every subcommand has help and usage errors exit 2") {
  for (const std::string sub : {"serve", "embed", "fid", "simulate", "validate"}) {
    auto r = run({sub, "--help"});
    CHECK_MESSAGE(r.code == 0, sub);
    CHECK(r.out.find("Usage") != std::string::npos);
  }
  CHECK(run({"--help"}).code == 0);
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"fid", "--real", "x"}).code == 2);
  CHECK(run({"embed", "--run-dir", "/nonexistent", "--out", "x"}).code == 2);
}

TEST_CASE("simulate and validate") {
  TempDir tmp;
  auto dir = simulate(tmp, "bias");
  auto r = run({"validate", "--run-dir", dir});
  CHECK(r.code == 0);
  CHECK(r.out == "iter_000000000 pass\niter_000005000 pass\niter_000010000 pass\niter_000015000 pass\n");

  auto bad = run({"simulate", "--scenario", "spiral", "--out", (tmp / "x").string()});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("split, converge, bias") != std::string::npos);
  CHECK(run({"simulate", "-N", "10", "--out", (tmp / "y").string()}).code == 2);

  SUBCASE("corrupted feature file fails naming the file") {
    auto f = fs::path(dir) / "snapshots/iter_000005000/feat_disc_feat.f32";
    auto bytes = read_file(f);
    write_file(f, bytes.substr(0, bytes.size() - 4));
    auto v = run({"validate", "--run-dir", dir});
    CHECK(v.code == 2);
    CHECK(v.out.find("iter_000005000 fail\n  feat_disc_feat.f32: [size]") != std::string::npos);
    auto j = json::parse(run({"validate", "--run-dir", dir, "--format", "json"}).out);
    CHECK(j["ok"] == false);
    CHECK(j["snapshots"][1]["status"] == "fail");
    CHECK(j["snapshots"][1]["issues"][0]["file"] == "feat_disc_feat.f32");
    CHECK(j["snapshots"][0]["status"] == "pass");
  }
  SUBCASE("missing DONE is reported as incomplete, not failed") {
    fs::remove(fs::path(dir) / "snapshots/iter_000015000/DONE");
    auto v = run({"validate", "--run-dir", dir});
    CHECK(v.code == 0);
    CHECK(v.out.find("iter_000015000 incomplete") != std::string::npos);
  }
}

TEST_CASE("embed writes layouts in both modes") {
  TempDir tmp;
  auto dir = simulate(tmp, "split");
  auto prog = (tmp / "prog.json").string(), prog2 = (tmp / "prog2.json").string();
  auto batch = (tmp / "batch.json").string();
  auto r1 = run({"embed", "--run-dir", dir, "--out", prog});
  REQUIRE(r1.code == 0);
  auto r2 = run({"embed", "--run-dir", dir, "--out", prog2, "--mode", "progressive"});
  REQUIRE(r2.code == 0);
  CHECK(read_file(prog) == read_file(prog2));
  CHECK(r1.out == r2.out);
  auto rb = run({"embed", "--run-dir", dir, "--out", batch, "--mode", "batch"});
  REQUIRE(rb.code == 0);

  auto labels = ingest::Simulator([] {
                  ingest::SimulationSpec s;
                  s.instances = 45;
                  return s;
                }())
                    .instance_ids();
  for (const auto& path : {prog, batch}) {
    auto doc = json::parse(read_file(path));
    CHECK(r1.out.find("bands 4") != std::string::npos);
    REQUIRE(doc["bands"].size() == 4);
    if (path == prog) CHECK(r1.out.find("config_hash " + doc["config_hash"].get<std::string>()) != std::string::npos);
    const double w = doc["config"]["band_width"], g = doc["config"]["band_gap"];
    double drift = 0, spread = 0;
    std::size_t pairs = 0;
    for (std::size_t b = 0; b < 4; ++b) {
      const auto& band = doc["bands"][b];
      CHECK(band["index"] == b);
      CHECK(std::abs(band["center"].get<double>() - b * (w + g)) < 1e-9);
      REQUIRE(band["points"].size() == 45);
      double mean = 0;
      for (std::size_t i = 0; i < 45; ++i) {
        const auto& p = band["points"][i];
        CHECK(p["id"] == labels[i]);
        CHECK(p["x"].get<double>() >= band["x_min"].get<double>());
        CHECK(p["x"].get<double>() <= band["x_max"].get<double>());
        mean += p["y"].get<double>() / 45;
      }
      for (std::size_t i = 0; i < 45; ++i) spread += std::pow(band["points"][i]["y"].get<double>() - mean, 2);
      if (b > 0)
        for (std::size_t i = 0; i < 45; ++i, ++pairs)
          drift += std::abs(band["points"][i]["y"].get<double>() - doc["bands"][b - 1]["points"][i]["y"].get<double>());
    }
    // Aligned bands: an instance moves far less between bands than the y spread.
    CHECK(drift / pairs < 0.5 * std::sqrt(spread / (4 * 45)));
  }
  CHECK(json::parse(read_file(prog))["frozen_upto"] == 3);
  CHECK(json::parse(read_file(batch))["frozen_upto"] == -1);

  auto seeded = run({"embed", "--run-dir", dir, "--out", (tmp / "s.json").string(), "--seed", "99"});
  REQUIRE(seeded.code == 0);
  CHECK(seeded.out != r1.out);

  SUBCASE("invalid snapshot aborts with the validation errors") {
    auto f = fs::path(dir) / "snapshots/iter_000010000/feat_clip.f32";
    write_file(f, read_file(f) + "xxxx");
    auto r = run({"embed", "--run-dir", dir, "--out", (tmp / "bad.json").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("feat_clip.f32") != std::string::npos);
    CHECK_FALSE(fs::exists(tmp / "bad.json"));
  }
}

TEST_CASE("fid command") {
  TempDir tmp;
  auto a = (tmp / "a.f32").string(), b = (tmp / "b.f32").string();
  write_f32(a, {-1, 0, 1});
  write_f32(b, {2, 3, 4});
  auto self = run({"fid", "--real", a, "--gen", a, "--dims", "1"});
  CHECK(self.code == 0);
  CHECK(self.out == "0.000000\n");
  CHECK(run({"fid", "--real", a, "--gen", b, "--dims", "1"}).out == "9.000000\n");
  auto j = json::parse(run({"fid", "--real", a, "--gen", b, "--dims", "1", "--format", "json"}).out);
  CHECK(std::abs(j["fid"].get<double>() - 9.0) < 1e-9);
  CHECK(j["real_rows"] == 3);

  auto bad = run({"fid", "--real", a, "--gen", b, "--dims", "2"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("not a multiple") != std::string::npos);

  const oracle::Fid5 fx;
  auto r5 = (tmp / "r5.f32").string(), g5 = (tmp / "g5.f32").string();
  auto real = fx.real(), gen = fx.gen();
  write_file(r5, encode_f32_le(real.data()));
  write_file(g5, encode_f32_le(gen.data()));
  auto out = run({"fid", "--real", r5, "--gen", g5, "--dims", "5"});
  REQUIRE(out.code == 0);
  CHECK(std::abs(std::stod(out.out) - fx.closed_form()) <= 0.05 * fx.closed_form());
}

TEST_CASE("serve") {
  TempDir tmp;
  auto missing = run({"serve", "--data-root", (tmp / "nope").string()});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("not a directory") != std::string::npos);

  fs::create_directory(tmp / "root");
  const int port = free_port();
  const std::string listen = "127.0.0.1:" + std::to_string(port);
  Result served{-1, "", ""};
  std::thread server([&] { served = run({"serve", "--data-root", (tmp / "root").string(), "--listen", listen,
                                         "--poll-ms", "50"}); });
  struct Stopper {
    std::thread& t;
    ~Stopper() {
      if (t.joinable()) {
        cli::request_shutdown();
        t.join();
      }
    }
  } stopper{server};
  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(5, 0);
  bool up = false;
  for (int i = 0; i < 100 && !up; ++i) {
    auto res = client.Get("/health");
    up = res && res->status == 200;
    if (!up) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  REQUIRE(up);

  auto busy = run({"serve", "--data-root", (tmp / "root").string(), "--listen", listen});
  CHECK(busy.code != 0);
  CHECK(busy.err.find("cannot bind") != std::string::npos);

  // Simulator drop into a run registered over HTTP.
  ingest::SimulationSpec spec;
  spec.scenario = "converge";
  spec.snapshots = 2;
  spec.instances = 40;
  spec.dims = 4;
  ingest::Simulator sim(spec);
  auto manifest = sim.manifest();
  manifest.embedding.steps = 200;
  manifest.embedding.early_exaggeration_steps = 50;
  manifest.embedding.momentum_switch_step = 50;
  REQUIRE(client.Post("/runs", json(manifest).dump(), "application/json")->status == 201);
  for (std::size_t t = 0; t < 2; ++t) ingest::write_snapshot(tmp / "root" / manifest.run_id, manifest, sim.snapshot(t));
  client.Post("/runs/" + manifest.run_id + "/snapshots/notify", "", "application/json");
  std::uint64_t cursor = 0;
  int layouts = 0;
  for (int i = 0; i < 30 && layouts < 2; ++i) {
    auto res = client.Get("/runs/" + manifest.run_id + "/events?after=" + std::to_string(cursor) + "&timeout_ms=1000");
    REQUIRE(res);
    const auto doc = json::parse(res->body);
    for (const auto& e : doc["events"]) {
      cursor = e["seq"];
      layouts += e["kind"] == "layout_updated";
    }
  }
  auto layout = json::parse(client.Get("/runs/" + manifest.run_id + "/layout")->body);
  CHECK(layout["bands"].size() == 2);

  cli::request_shutdown();
  server.join();
  CHECK(served.code == 0);
  CHECK(served.out.find("listening on " + listen) != std::string::npos);
  auto events = read_file(tmp / "root" / manifest.run_id / "events.jsonl");
  CHECK(std::count(events.begin(), events.end(), '\n') == 6);
}
