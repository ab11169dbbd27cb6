#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "neuromap/capture.hpp"
#include "neuromap/error.hpp"
#include "neuromap/estimator.hpp"
#include "neuromap/external.hpp"
#include "neuromap/metrics.hpp"
#include "neuromap/model.hpp"
#include "neuromap/navigate.hpp"
#include "neuromap/report.hpp"
#include "neuromap/train.hpp"
#include "neuromap/version.hpp"
#include "neuromap/world.hpp"

namespace neuromap::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kInvalidInput = 2, kRuntimeAbort = 3 };

inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::kRuntime:
    case ErrorKind::kEstimatorUnavailable:
      return kRuntimeAbort;
    default:
      return kInvalidInput;
  }
}

/// JSON configuration files. Top-level objects named after a subcommand
/// apply to it; plain keys apply to the subcommand being run.
class ConfigJson : public CLI::Config {
 public:
  std::string active_subcommand;

  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    nlohmann::json j;
    for (const CLI::Option* opt : app->get_options({})) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const std::string name = opt->get_lnames()[0];
      if (opt->count() > 0)
        j[name] = opt->as<std::string>();
      else if (default_also && !opt->get_default_str().empty())
        j[name] = opt->get_default_str();
    }
    return j.dump(2);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(input);
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError("config", std::string("invalid JSON config: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config", "JSON config must be an object");
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        for (const auto& [k2, v2] : value.items()) items.push_back(make_item({key}, k2, v2));
      } else {
        std::vector<std::string> parents;
        if (!active_subcommand.empty()) parents.push_back(active_subcommand);
        items.push_back(make_item(parents, key, value));
      }
    }
    return items;
  }

 private:
  static CLI::ConfigItem make_item(std::vector<std::string> parents, const std::string& name, const nlohmann::json& v) {
    CLI::ConfigItem item;
    item.parents = std::move(parents);
    item.name = name;
    auto scalar = [](const nlohmann::json& x) { return x.is_string() ? x.get<std::string>() : x.dump(); };
    if (v.is_array())
      for (const auto& e : v) item.inputs.push_back(scalar(e));
    else
      item.inputs.push_back(scalar(v));
    return item;
  }
};

struct SensorOptions {
  double fov = SensorConfig{}.fov;
  int rays = SensorConfig{}.ray_count;
  double max_range = SensorConfig{}.max_range;

  void add(CLI::App* app) {
    app->add_option("--fov", fov, "Sensor field of view, degrees")->capture_default_str();
    app->add_option("--rays", rays, "Rays per observation")->capture_default_str();
    app->add_option("--max-range", max_range, "Sensor range, metres")->capture_default_str();
  }
  SensorConfig config() const { return {fov, rays, max_range}; }
};

struct EstimatorOptions {
  std::string kind = "knn";
  double sigma_pos = 0.0;
  double sigma_theta = 0.0;
  std::string db;
  int k = 5;
  std::string weighting = "idw";
  std::string model;
  std::string external_cmd;
  long external_timeout_ms = 5000;

  void add(CLI::App* app) {
    app->add_option("--estimator", kind, "oracle | knn | model | external")
        ->check(CLI::IsMember({"oracle", "knn", "model", "external"}))
        ->capture_default_str();
    app->add_option("--sigma-pos", sigma_pos, "Oracle position noise, metres")->capture_default_str();
    app->add_option("--sigma-theta", sigma_theta, "Oracle yaw noise, degrees")->capture_default_str();
    app->add_option("--db", db, "k-NN database (dataset file)");
    app->add_option("--k", k, "k-NN neighbour count")->capture_default_str();
    app->add_option("--weighting", weighting, "k-NN weighting: uniform | idw")->capture_default_str();
    app->add_option("--model", model, "Trained model file");
    app->add_option("--external-cmd", external_cmd, "Shell command speaking the EST/POSE line protocol");
    app->add_option("--external-timeout-ms", external_timeout_ms, "Per-request timeout for --estimator external")
        ->capture_default_str();
  }

  std::unique_ptr<Estimator> build(const EnvironmentSpec& env, std::uint64_t seed,
                                   const Dataset* preloaded_db = nullptr) const {
    if (kind == "oracle") return std::make_unique<OracleEstimator>(OracleConfig{sigma_pos, sigma_theta, seed}, env.bounds);
    if (kind == "knn") {
      if (!preloaded_db && db.empty()) fail(ErrorKind::kInvalidArgument, "--estimator knn requires --db");
      Dataset loaded;
      const Dataset* d = preloaded_db;
      if (!d) {
        loaded = load_dataset(db);
        d = &loaded;
      }
      if (!(d->sensor == env.sensor)) fail(ErrorKind::kConfiguration, "k-NN database sensor does not match the environment");
      return std::make_unique<KnnEstimator>(*d, KnnConfig{k, parse_weighting(weighting)});
    }
    if (kind == "model") {
      if (model.empty()) fail(ErrorKind::kInvalidArgument, "--estimator model requires --model");
      ModelFile f = load_model(model);
      if (!(f.sensor == env.sensor)) fail(ErrorKind::kConfiguration, "model sensor does not match the environment");
      return std::make_unique<RegressorEstimator>(std::move(f.model), env.bounds);
    }
    if (external_cmd.empty()) fail(ErrorKind::kInvalidArgument, "--estimator external requires --external-cmd");
    return std::make_unique<ExternalEstimator>(external_cmd, env.bounds, static_cast<std::size_t>(env.sensor.ray_count),
                                               std::chrono::milliseconds(external_timeout_ms));
  }
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) fail(ErrorKind::kIo, "write failed for '" + path.string() + "'");
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
  std::vector<int> out;
  for (auto f : textio::split(text, ',')) {
    f = textio::trim(f);
    if (f.empty()) continue;
    const auto v = textio::parse_u64(f, what);
    out.push_back(static_cast<int>(v));
  }
  return out;
}

/// Runs one invocation. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::string provenance = std::string("neuromap ") + kVersion;
  for (const auto& a : args) provenance += " " + a;

  CLI::App app{"Pose-labelled dataset generation, implicit-map pose estimators and waypoint navigation on occupancy grids",
               "neuromap"};
  app.require_subcommand(1);
  app.fallthrough();  // --config may follow the subcommand
  auto config = std::make_shared<ConfigJson>();
  app.config_formatter(config);
  app.set_config("--config", "", "JSON config file (flags override it)");
  app.set_version_flag("--version", kVersion);

  std::uint64_t seed = 0;
  std::string env_path, out_path;
  auto common = [&](CLI::App* sub, bool needs_out = true) {
    sub->add_option("--seed", seed, "Random seed")->capture_default_str();
    sub->add_option("--env", env_path, "Environment grid file")->required()->check(CLI::ExistingFile);
    auto* o = sub->add_option("--out", out_path, "Output path");
    if (needs_out) o->required();
  };

  // gen
  auto* gen = app.add_subcommand("gen", "Sample uniform random free poses and their observations");
  std::size_t gen_n = 0;
  SensorOptions gen_sensor;
  common(gen);
  gen->add_option("--n", gen_n, "Number of samples")->required()->check(CLI::PositiveNumber);
  gen_sensor.add(gen);

  // walk
  auto* walk = app.add_subcommand("walk", "Random-walk traversal with distance/rotation capture thresholds");
  WalkConfig walk_cfg;
  SensorOptions walk_sensor;
  common(walk);
  walk->add_option("--max-steps", walk_cfg.max_steps, "Walk length in steps")->capture_default_str();
  walk->add_option("--capture-dist", walk_cfg.capture_dist, "Capture after moving more than this, metres")->capture_default_str();
  walk->add_option("--capture-rot", walk_cfg.capture_rot, "Capture after rotating more than this, degrees")->capture_default_str();
  walk->add_option("--step-len", walk_cfg.step_len, "Advance per step, metres")->capture_default_str();
  walk->add_option("--clearance", walk_cfg.clearance_radius, "Footprint radius, metres")->capture_default_str();
  walk_sensor.add(walk);

  // train
  auto* trn = app.add_subcommand("train", "Train the regressor on a dataset");
  TrainConfig tcfg;
  std::string train_data, hidden = "64,64", yaw_mode = "angle", loss = "l1", decay_mode = "staircase", resume, checkpoint_path,
                          history_path;
  common(trn);
  trn->add_option("--dataset", train_data, "Training dataset")->required()->check(CLI::ExistingFile);
  trn->add_option("--history", history_path, "History CSV (default <out>.history.csv)");
  trn->add_option("--checkpoint", checkpoint_path, "Checkpoint file (default <out>.ckpt.json)");
  trn->add_option("--resume", resume, "Resume from a checkpoint")->check(CLI::ExistingFile);
  trn->add_option("--hidden", hidden, "Hidden layer widths, comma separated")->capture_default_str();
  trn->add_option("--max-iterations", tcfg.max_iterations)->capture_default_str();
  trn->add_option("--eval-interval", tcfg.eval_interval)->capture_default_str();
  trn->add_option("--batch-size", tcfg.batch_size)->capture_default_str();
  trn->add_option("--weight-decay", tcfg.weight_decay)->capture_default_str();
  trn->add_option("--lr0", tcfg.lr0)->capture_default_str();
  trn->add_option("--decay-rate", tcfg.decay_rate)->capture_default_str();
  trn->add_option("--decay-interval", tcfg.decay_interval)->capture_default_str();
  trn->add_option("--decay-mode", decay_mode, "staircase | per-interval")->capture_default_str();
  trn->add_option("--patience", tcfg.patience)->capture_default_str();
  trn->add_option("--val-fraction", tcfg.val_fraction)->capture_default_str();
  trn->add_option("--yaw-mode", yaw_mode, "angle | sincos")->capture_default_str();
  trn->add_option("--loss", loss, "l1 | l2")->capture_default_str();

  // eval
  auto* evl = app.add_subcommand("eval", "Evaluate an estimator on a test set");
  EstimatorOptions eval_est;
  std::string test_path, table_path, ablate;
  common(evl);
  evl->add_option("--test", test_path, "Test dataset")->required()->check(CLI::ExistingFile);
  evl->add_option("--table", table_path, "Text table output (default <out>.txt)");
  evl->add_option("--ablate", ablate, "sizes=N1,N2,... reruns k-NN over database prefixes");
  eval_est.add(evl);

  // navigate
  auto* nav = app.add_subcommand("navigate", "Drive the simulated vehicle through waypoints");
  EstimatorOptions nav_est;
  NavConfig nav_cfg;
  OdometryConfig odo_cfg;
  std::string wp_path, start_text;
  double t_leg = 0.0;
  common(nav);
  nav->add_option("--waypoints", wp_path, "Waypoint CSV")->required()->check(CLI::ExistingFile);
  nav->add_option("--start", start_text, "Start pose x,y,theta")->required();
  nav->add_option("--t-d", nav_cfg.t_d, "Waypoint distance threshold, metres")->capture_default_str();
  nav->add_option("--t-a", nav_cfg.t_a, "Heading threshold, degrees")->capture_default_str();
  auto* t_leg_opt = nav->add_option("--t-leg", t_leg, "Movement-leg tolerance (default: --t-d)");
  nav->add_option("--linear-speed", nav_cfg.linear_speed)->capture_default_str();
  nav->add_option("--angular-speed", nav_cfg.angular_speed)->capture_default_str();
  nav->add_option("--dt", nav_cfg.dt)->capture_default_str();
  nav->add_option("--max-ticks", nav_cfg.max_ticks)->capture_default_str();
  nav->add_option("--footprint", nav_cfg.footprint_radius, "Footprint radius, metres")->capture_default_str();
  nav->add_option("--odo-lin-frac", odo_cfg.sigma_lin_frac)->capture_default_str();
  nav->add_option("--odo-ang", odo_cfg.sigma_ang_per_step)->capture_default_str();
  nav_est.add(nav);

  // plot
  auto* plt = app.add_subcommand("plot", "Render a coverage or route plot as SVG");
  std::string plot_dataset, plot_trace, plot_wps;
  common(plt);
  plt->add_option("--dataset", plot_dataset, "Dataset for a coverage plot")->check(CLI::ExistingFile);
  plt->add_option("--trace", plot_trace, "Trace CSV for a route plot")->check(CLI::ExistingFile);
  plt->add_option("--waypoints", plot_wps, "Waypoints for a route plot")->check(CLI::ExistingFile);

  // bench
  auto* bch = app.add_subcommand("bench", "Measure estimator throughput");
  EstimatorOptions bench_est;
  int frames = 100, reps = 5;
  common(bch, false);
  bch->add_option("--frames", frames, "Frames per repetition")->capture_default_str()->check(CLI::PositiveNumber);
  bch->add_option("--reps", reps, "Repetitions")->capture_default_str()->check(CLI::PositiveNumber);
  bench_est.add(bch);

  for (const auto& a : args)
    if (app.get_subcommand_no_throw(a) != nullptr) {
      config->active_subcommand = a;
      break;
    }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help on a subcommand, --version
      std::ostringstream o, er;
      app.exit(e, o, er);
      out << o.str() << er.str();
      return kOk;
    }
    std::ostringstream o, er;
    app.exit(e, o, er);
    err << er.str() << o.str();
    return kUsage;
  }

  try {
    auto env = [&](const SensorConfig& sensor = {}) { return load_environment(env_path, sensor); };

    if (gen->parsed()) {
      const EnvironmentSpec e = env(gen_sensor.config());
      Dataset d = generate_dataset(e, gen_n, seed);
      d.provenance = provenance;
      save_dataset(d, out_path);
      const CoverageSummary c = coverage(e, d);
      nlohmann::ordered_json j;
      j["provenance"] = provenance;
      j["samples"] = d.size();
      j["cell_size"] = c.cell_size;
      j["free_cells"] = c.free_cells;
      j["covered_cells"] = c.covered_cells;
      j["coverage_fraction"] = c.fraction();
      write_text(out_path + ".coverage.json", j.dump(2) + "\n");
      out << "wrote " << d.size() << " samples to " << out_path << " (coverage " << c.covered_cells << "/" << c.free_cells
          << " coarse free cells)\n";
      return kOk;
    }

    if (walk->parsed()) {
      const EnvironmentSpec e = env(walk_sensor.config());
      WalkResult w = random_walk_capture(e, walk_cfg, seed);
      w.dataset.provenance = provenance;
      save_dataset(w.dataset, out_path);
      std::string log = "# " + provenance + "\n# wedged=" + (w.wedged ? "true" : "false") + "\n";
      log += "step,x,y,theta,advanced,rotated,path_since_capture,rotation_since_capture,captured\n";
      for (const auto& s : w.log) {
        log += std::to_string(s.step) + "," + textio::format_sig(s.pose.x(), 9) + "," + textio::format_sig(s.pose.y(), 9) +
               "," + textio::format_sig(s.pose.theta(), 9) + "," + textio::format_sig(s.advanced, 9) + "," +
               textio::format_sig(s.rotated, 9) + "," + textio::format_sig(s.path_since_capture, 12) + "," +
               textio::format_sig(s.rotation_since_capture, 12) + "," + (s.captured ? "1" : "0") + "\n";
      }
      write_text(out_path + ".steps.csv", log);
      out << "wrote " << w.dataset.size() << " captures from " << w.log.size() << " steps to " << out_path
          << (w.wedged ? " (walk wedged, stopped early)" : "") << "\n";
      return kOk;
    }

    if (trn->parsed()) {
      const Dataset data = load_dataset(train_data);
      const EnvironmentSpec e = env(data.sensor);
      tcfg.seed = seed;
      tcfg.hidden = parse_int_list(hidden, "--hidden");
      tcfg.yaw_mode = parse_yaw_mode(yaw_mode);
      tcfg.loss = parse_loss(loss);
      tcfg.decay_mode = parse_decay_mode(decay_mode);
      if (history_path.empty()) history_path = out_path + ".history.csv";
      if (checkpoint_path.empty()) checkpoint_path = out_path + ".ckpt.json";

      Trainer trainer(data, e, tcfg);
      if (!resume.empty()) {
        try {
          trainer.restore(nlohmann::json::parse(read_text(resume)));
        } catch (const nlohmann::json::exception& ex) {
          fail(ErrorKind::kParse, std::string("checkpoint: ") + ex.what());
        }
      }
      std::size_t evals = 0;
      const TrainResult r = trainer.run([&](const Trainer& t, const HistoryRow& row) {
        if (++evals % 10 == 0) write_text(checkpoint_path, t.checkpoint().dump() + "\n");
        out << "iter " << row.iteration << " lr " << row.lr << " val_pos_err " << row.val_pos_err << " val_theta_err "
            << row.val_theta_err << " " << row.event << "\n";
      });
      write_text(checkpoint_path, trainer.checkpoint().dump() + "\n");
      ModelFile mf{r.model, e.name, e.sensor, e.bounds, provenance};
      save_model(mf, out_path);
      write_text(history_path, "# " + provenance + "\n" + format_history(r.history));
      out << "trained " << r.iterations << " iterations" << (r.converged ? " (converged)" : "") << ", best val_pos_err "
          << r.best_val_pos_err << "; model written to " << out_path << "\n";
      return kOk;
    }

    if (evl->parsed()) {
      const Dataset test = load_dataset(test_path);
      const EnvironmentSpec e = env(test.sensor);
      if (table_path.empty()) table_path = out_path + ".txt";
      nlohmann::ordered_json j;
      std::vector<TableRow> rows;
      if (!ablate.empty()) {
        if (eval_est.kind != "knn") fail(ErrorKind::kInvalidArgument, "--ablate is supported for --estimator knn only");
        if (ablate.rfind("sizes=", 0) != 0) fail(ErrorKind::kInvalidArgument, "--ablate expects sizes=N1,N2,...");
        if (eval_est.db.empty()) fail(ErrorKind::kInvalidArgument, "--estimator knn requires --db");
        const Dataset db = load_dataset(eval_est.db);
        j["provenance"] = provenance;
        j["estimator"] = "knn";
        nlohmann::ordered_json runs = nlohmann::ordered_json::array();
        for (int size : parse_int_list(ablate.substr(6), "--ablate")) {
          if (size < 1 || static_cast<std::size_t>(size) > db.size())
            fail(ErrorKind::kInvalidArgument, "--ablate size " + std::to_string(size) + " exceeds the database");
          const Dataset sub = head(db, static_cast<std::size_t>(size));
          auto est = eval_est.build(e, seed, &sub);
          const Metrics m = evaluate(*est, test, e);
          auto mj = metrics_to_json(m, "knn");
          mj["db_size"] = size;
          runs.push_back(mj);
          rows.push_back({"knn@" + std::to_string(size), m});
        }
        j["ablation"] = runs;
      } else {
        auto est = eval_est.build(e, seed);
        const Metrics m = evaluate(*est, test, e);
        j = metrics_to_json(m, est->name(), provenance);
        rows.push_back({est->name(), m});
      }
      write_text(out_path, j.dump(2) + "\n");
      const std::string table = render_table(rows);
      write_text(table_path, table);
      out << table;
      return kOk;
    }

    if (nav->parsed()) {
      const EnvironmentSpec e = env();
      const auto wps = load_waypoints(wp_path);
      const auto sf = textio::split(start_text, ',');
      if (sf.size() != 3) fail(ErrorKind::kInvalidArgument, "--start expects x,y,theta");
      const Pose2D start(textio::parse_double(textio::trim(sf[0]), "--start"), textio::parse_double(textio::trim(sf[1]), "--start"),
                         textio::parse_double(textio::trim(sf[2]), "--start"));
      if (t_leg_opt->count() > 0) nav_cfg.t_leg = t_leg;
      odo_cfg.seed = seed;
      auto est = nav_est.build(e, seed);
      const NavResult r = navigate_waypoints(wps, *est, e, start, nav_cfg, odo_cfg);
      const std::filesystem::path dir(out_path);
      std::filesystem::create_directories(dir);
      write_text(dir / "trace.csv", format_trace(r.trace, provenance));
      write_text(dir / "report.json", nav_report_to_json(r, wps, provenance).dump(2) + "\n");
      write_text(dir / "route.svg", route_svg(e, r.trace, wps, provenance));
      out << "navigation " << to_string(r.status) << ": " << r.report.ticks << " ticks, mean closest distance "
          << r.report.mean_closest_true_dist << " m (estimated " << r.report.mean_closest_est_dist << " m)\n";
      if (r.status != NavStatus::kSuccess) {
        err << "navigation aborted: " << r.message << "\n";
        return kRuntimeAbort;
      }
      return kOk;
    }

    if (plt->parsed()) {
      const EnvironmentSpec e = env();
      if (plot_dataset.empty() == plot_trace.empty()) fail(ErrorKind::kInvalidArgument, "plot needs exactly one of --dataset or --trace");
      std::string svg_text;
      if (!plot_dataset.empty()) {
        svg_text = coverage_svg(e, load_dataset(plot_dataset), provenance);
      } else {
        std::ifstream in(plot_trace);
        const RouteTrace trace = parse_trace(in, plot_trace);
        std::vector<Waypoint> wps;
        if (!plot_wps.empty()) wps = load_waypoints(plot_wps);
        svg_text = route_svg(e, trace, wps, provenance);
      }
      write_text(out_path, svg_text);
      out << "wrote " << out_path << "\n";
      return kOk;
    }

    if (bch->parsed()) {
      const EnvironmentSpec e = env();
      auto est = bench_est.build(e, seed);
      Rng rng(seed);
      std::vector<Observation> obs;
      std::vector<Pose2D> poses;
      for (int i = 0; i < frames; ++i) {
        poses.push_back(sample_random_pose(e, rng));
        obs.push_back(raycast(e, poses.back()));
      }
      std::vector<double> fps;
      for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        for (int i = 0; i < frames; ++i) est->estimate(Frame{obs[static_cast<std::size_t>(i)], poses[static_cast<std::size_t>(i)]});
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        fps.push_back(secs > 0 ? frames / secs : 0.0);
      }
      const double mu = mean(fps);
      double var = 0.0;
      for (double f : fps) var += (f - mu) * (f - mu);
      const double sd = reps > 1 ? std::sqrt(var / (reps - 1)) : 0.0;
      nlohmann::ordered_json j;
      j["provenance"] = provenance;
      j["estimator"] = est->name();
      j["frames"] = frames;
      j["repetitions"] = reps;
      j["mean_fps"] = mu;
      j["std_fps"] = sd;
      j["fps"] = fps;
      if (!out_path.empty()) write_text(out_path, j.dump(2) + "\n");
      out << est->name() << ": " << mu << " +- " << sd << " estimates/s over " << frames << " frames x " << reps << " reps\n";
      return kOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  }
  return kUsage;
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace neuromap::cli
