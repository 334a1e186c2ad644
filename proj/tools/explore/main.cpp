// Command-line front end; talks to the pipeline exclusively through the C
// API, the same surface out-of-tree integrations use.
#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <fsmp/fsmp.h>

namespace {

std::string fetchString(int (*getter)(const fsmp_run_result_t*, char*, size_t*),
                        const fsmp_run_result_t* r) {
  size_t len = 0;
  if (getter(r, nullptr, &len) != FSMP_OK) return {};
  std::string buf(len, '\0');
  if (getter(r, buf.data(), &len) != FSMP_OK) return {};
  buf.resize(len > 0 ? len - 1 : 0);  // drop the NUL
  return buf;
}

std::string fetchBenchString(int (*getter)(const fsmp_bench_result_t*, char*, size_t*),
                             const fsmp_bench_result_t* r) {
  size_t len = 0;
  if (getter(r, nullptr, &len) != FSMP_OK) return {};
  std::string buf(len, '\0');
  if (getter(r, buf.data(), &len) != FSMP_OK) return {};
  buf.resize(len > 0 ? len - 1 : 0);
  return buf;
}

int fail(const char* stage) {
  std::fprintf(stderr, "error: %s: %s\n", stage, fsmp_last_error());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic frontier exploration pipeline"};
  app.require_subcommand(1);

  // ---- run
  auto* run = app.add_subcommand("run", "explore a scenario");
  std::string run_scenario;
  std::uint64_t run_seed = 0;
  bool run_has_seed = false;
  std::string run_record, run_metrics;
  bool run_verify = false, run_quiet = false;
  run->add_option("scenario", run_scenario, "scenario file")->required();
  run->add_option("--seed", run_seed, "override the scenario seed")
      ->each([&](const std::string&) { run_has_seed = true; });
  run->add_option("--record", run_record, "write a replayable run journal");
  run->add_option("--metrics", run_metrics, "write a JSONL metrics stream");
  run->add_flag("--verify", run_verify, "run per-epoch oracle verification");
  run->add_flag("--quiet", run_quiet, "suppress progress output");

  // ---- replay
  auto* replay = app.add_subcommand("replay", "re-execute a recorded run and compare");
  std::string replay_journal;
  int replay_mutate = 0;
  std::int64_t replay_mutate_limit = 0;
  std::uint64_t replay_mutate_seed = 1;
  bool replay_quiet = false;
  replay->add_option("journal", replay_journal, "run journal file")->required();
  replay->add_option("--mutate", replay_mutate,
                     "inject N adversarial map mutations per epoch (skips digest comparison)");
  replay->add_option("--mutate-limit", replay_mutate_limit,
                     "total mutation budget (default 100 when --mutate is set)");
  replay->add_option("--mutate-seed", replay_mutate_seed, "mutation RNG seed");
  replay->add_flag("--quiet", replay_quiet, "suppress progress output");

  // ---- bench
  auto* bench = app.add_subcommand("bench", "compare frontier detectors on one scenario");
  std::string bench_scenario, bench_detectors = "f3d,aabb_rg,aabb_wfd", bench_csv;
  std::uint64_t bench_seed = 0;
  bool bench_has_seed = false, bench_quiet = false;
  bench->add_option("scenario", bench_scenario, "scenario file")->required();
  bench->add_option("--detectors", bench_detectors,
                    "comma-separated list from f3d,aabb_rg,aabb_wfd,naive");
  bench->add_option("--csv", bench_csv, "write per-iteration CSV to this file");
  bench->add_option("--seed", bench_seed, "override the scenario seed")
      ->each([&](const std::string&) { bench_has_seed = true; });
  bench->add_flag("--quiet", bench_quiet, "suppress progress output");

  // ---- gen-world
  auto* gen = app.add_subcommand("gen-world", "generate a world scene file");
  std::string gen_kind, gen_out;
  std::uint64_t gen_seed = 1;
  std::vector<double> gen_size{20.0, 20.0, 3.0};
  double gen_res = 0.2;
  gen->add_option("kind", gen_kind, "maze or building")
      ->required()
      ->check(CLI::IsMember({"maze", "building"}));
  gen->add_option("-o,--output", gen_out, "output scene file")->required();
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--size", gen_size, "world extents in meters (x y z)")->expected(3);
  gen->add_option("--resolution", gen_res, "grid resolution the walls snap to");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    fsmp_scenario_t* sc = nullptr;
    if (fsmp_scenario_load(run_scenario.c_str(), &sc) != FSMP_OK) return fail("load scenario");
    if (run_has_seed) fsmp_scenario_set_seed(sc, run_seed);

    fsmp_run_options_t opt{};
    opt.metrics_path = run_metrics.empty() ? nullptr : run_metrics.c_str();
    opt.record_path = run_record.empty() ? nullptr : run_record.c_str();
    opt.verify = run_verify ? 1 : 0;
    opt.log_progress = run_quiet ? 0 : 1;

    fsmp_run_result_t* res = nullptr;
    const int rc = fsmp_run(sc, &opt, &res);
    fsmp_scenario_free(sc);
    if (rc != FSMP_OK) return fail("run");

    std::fputs(fetchString(fsmp_result_summary_csv, res).c_str(), stdout);
    int exit_code = fsmp_result_exit_code(res);
    if (fsmp_result_verify_failed(res)) {
      std::fprintf(stderr, "verification failed at epoch %lld: %s\n",
                   static_cast<long long>(fsmp_result_failure_epoch(res)),
                   fetchString(fsmp_result_failure, res).c_str());
      exit_code = 1;
    }
    fsmp_result_free(res);
    return exit_code;
  }

  if (replay->parsed()) {
    if (replay_mutate > 0 && replay_mutate_limit <= 0) replay_mutate_limit = 100;
    fsmp_run_result_t* res = nullptr;
    const int rc = fsmp_replay(replay_journal.c_str(), replay_mutate, replay_mutate_limit,
                               replay_mutate_seed, replay_quiet ? 0 : 1, &res);
    if (rc != FSMP_OK) return fail("replay");

    const int matched = fsmp_result_matched(res);
    if (matched) {
      std::fprintf(stdout, "replay ok: %lld epochs, coverage %.6f\n",
                   static_cast<long long>(fsmp_result_epochs(res)), fsmp_result_coverage(res));
    } else {
      std::fprintf(stdout, "replay MISMATCH at epoch %lld: %s\n",
                   static_cast<long long>(fsmp_result_failure_epoch(res)),
                   fetchString(fsmp_result_failure, res).c_str());
    }
    fsmp_result_free(res);
    return matched ? 0 : 1;
  }

  if (bench->parsed()) {
    fsmp_scenario_t* sc = nullptr;
    if (fsmp_scenario_load(bench_scenario.c_str(), &sc) != FSMP_OK) return fail("load scenario");
    if (bench_has_seed) fsmp_scenario_set_seed(sc, bench_seed);

    fsmp_bench_result_t* res = nullptr;
    const int rc = fsmp_bench(sc, bench_detectors.c_str(), bench_quiet ? 0 : 1, &res);
    fsmp_scenario_free(sc);
    if (rc != FSMP_OK) return fail("bench");

    std::fputs(fetchBenchString(fsmp_bench_summary, res).c_str(), stdout);
    if (!bench_csv.empty()) {
      const std::string csv = fetchBenchString(fsmp_bench_csv, res);
      std::FILE* f = std::fopen(bench_csv.c_str(), "w");
      if (f == nullptr) {
        std::fprintf(stderr, "error: cannot write %s\n", bench_csv.c_str());
        fsmp_bench_result_free(res);
        return 1;
      }
      std::fputs(csv.c_str(), f);
      std::fclose(f);
    }
    const int ok = fsmp_bench_sets_match(res);
    if (!ok) std::fprintf(stderr, "bench: detector frontier sets diverged\n");
    fsmp_bench_result_free(res);
    return ok ? 0 : 1;
  }

  if (gen->parsed()) {
    if (fsmp_world_generate(gen_kind.c_str(), gen_size[0], gen_size[1], gen_size[2], gen_res,
                            gen_seed, gen_out.c_str()) != FSMP_OK)
      return fail("gen-world");
    std::fprintf(stdout, "wrote %s\n", gen_out.c_str());
    return 0;
  }

  return 1;
}
