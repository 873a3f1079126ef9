#include "ppfa/app/commands.hpp"

#include "ppfa/app/csv.hpp"
#include "ppfa/error.hpp"
#include "ppfa/model_io.hpp"
#include "ppfa/model_select.hpp"
#include "ppfa/pipeline.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <ostream>

namespace ppfa::app {

namespace {

void require(const std::filesystem::path& p, const char* flag)
{
  if (p.empty()) {
    throw config_error(std::string("missing required option ") + flag);
  }
}

std::ofstream open_out(const std::filesystem::path& path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCategory::io, "cannot open '" + path.string() + "' for writing");
  }
  return out;
}

} // namespace

RunConfig resolve_config(const CommandOptions& opts)
{
  RunConfig cfg = opts.config.empty() ? RunConfig{} : load_config(opts.config);
  if (opts.seed) {
    cfg.em.seed = *opts.seed;
    cfg.simulate.seed = *opts.seed;
    cfg.grid.injection.seed = *opts.seed;
  }
  if (opts.alpha) {
    if (!(*opts.alpha > 0.0 && *opts.alpha < 1.0)) {
      throw config_error("--alpha must lie in (0, 1)");
    }
    cfg.alpha = *opts.alpha;
  }
  return cfg;
}

void write_report(const std::filesystem::path& path, const MonitorReport& report)
{
  std::ofstream out = open_out(path);
  out << "index,T2,SPE,DI,flag_T2,flag_SPE,flag_DI,verdict,burn_in\n";
  for (const ReportRow& row : report.rows) {
    out << row.index << ',' << format_double(row.t2) << ',' << format_double(row.spe) << ','
        << format_double(row.di) << ',' << int(row.flag_t2) << ',' << int(row.flag_spe) << ','
        << int(row.flag_di) << ',' << verdict_name(row.verdict) << ',' << int(row.burn_in)
        << '\n';
  }
  if (!out) {
    throw Error(ErrorCategory::io, "failed writing '" + path.string() + "'");
  }
}

void write_trace(const std::filesystem::path& path, const TrainingTrace& trace)
{
  std::ofstream out = open_out(path);
  out << "iteration,loglik,residual,seconds\n";
  out << 0 << ',' << format_double(trace.initial_log_likelihood) << ",0,0\n";
  for (const IterationRecord& rec : trace.iterations) {
    out << rec.iteration << ',' << format_double(rec.log_likelihood) << ','
        << format_double(rec.lemma_residual) << ',' << format_double(rec.seconds) << '\n';
  }
}

void cmd_train(const CommandOptions& opts, std::ostream& log)
{
  require(opts.data, "--data");
  require(opts.model, "--model");
  const RunConfig cfg = resolve_config(opts);
  const Table table = read_csv(opts.data);
  cfg.em.validate(table.values.cols());

  const TrainResult trained = train_model(table.values, cfg.em, cfg.alpha);
  save_model(trained.model, opts.model);
  if (!opts.trace.empty()) {
    write_trace(opts.trace, trained.trace);
  }

  const ControlLimits& l = trained.model.limits;
  log << "loglik " << format_double(trained.log_likelihood) << '\n'
      << "iterations " << trained.trace.iterations.size()
      << (trained.trace.converged ? " (converged)" : " (iteration limit)") << '\n'
      << "psi_T2 " << format_double(l.psi_t2) << '\n'
      << "psi_SPE " << format_double(l.psi_spe) << '\n'
      << "psi_DI " << format_double(l.psi_di) << '\n';
  // The same warning tends to repeat every iteration; the trace file keeps
  // the per-iteration detail.
  const std::vector<std::string>& warnings = trained.trace.warnings;
  constexpr std::size_t kShown = 5;
  for (std::size_t i = 0; i < std::min(warnings.size(), kShown); ++i) {
    log << "warning: " << warnings[i] << '\n';
  }
  if (warnings.size() > kShown) {
    log << "warning: " << warnings.size() - kShown << " more not shown\n";
  }
}

void cmd_score(const CommandOptions& opts, std::ostream& log)
{
  require(opts.model, "--model");
  require(opts.data, "--data");
  require(opts.out, "--out");
  const PpfaModel model = load_model(opts.model);
  const Table table = read_csv(opts.data);
  if (table.values.cols() != model.params.m()) {
    throw config_error("data has " + std::to_string(table.values.cols()) +
                       " columns but the model expects " + std::to_string(model.params.m()));
  }
  const MonitorReport report = score_stream(model, table.values);
  write_report(opts.out, report);
  log << "samples " << report.rows.size() << '\n'
      << "alarms_T2 " << report.alarms_t2() << '\n'
      << "alarms_SPE " << report.alarms_spe() << '\n'
      << "alarms_DI " << report.alarms_di() << '\n';
}

void cmd_select(const CommandOptions& opts, std::ostream& log)
{
  require(opts.data, "--data");
  require(opts.out, "--out");
  const RunConfig cfg = resolve_config(opts);
  const Table table = read_csv(opts.data);
  const SelectionResult res = select(table.values, cfg.grid, cfg.em, cfg.alpha);

  std::ofstream out = open_out(opts.out);
  out << "r,s,FDR,FAR,loglik,train_seconds\n";
  for (const ScoreRow& row : res.scoreboard) {
    out << row.r << ',' << row.s << ',' << format_double(row.fdr) << ','
        << format_double(row.far) << ',' << format_double(row.log_likelihood) << ','
        << format_double(row.train_seconds) << '\n';
  }
  for (const SkippedPair& sk : res.skipped) {
    log << "skipped r=" << sk.r << " s=" << sk.s << ": " << sk.reason << '\n';
  }
  log << "selected r=" << res.r << " s=" << res.s << '\n';
}

void cmd_simulate(const CommandOptions& opts, std::ostream& log)
{
  require(opts.out, "--out");
  const RunConfig cfg = resolve_config(opts);
  const SimulateSpec& spec = cfg.simulate;

  ModelParams params =
    random_stable_model(spec.m, spec.r, spec.s, spec.sigma2, spec.seed, spec.max_root);
  if (spec.beta) {
    params.beta = *spec.beta;
    set_unit_variance_noise(params);
  }
  validate(params);
  Eigen::MatrixXd data = simulate(params, spec.n, spec.seed).observations;

  std::ofstream sidecar = open_out(opts.out.string() + ".faults.csv");
  sidecar << "start,end,channel,magnitude\n";
  if (spec.fault) {
    const FaultSpec& f = *spec.fault;
    const Eigen::RowVectorXd mean = data.colwise().mean();
    const Eigen::RowVectorXd sd =
      ((data.rowwise() - mean).array().square().colwise().sum() /
       static_cast<double>(std::max<Index>(data.rows() - 1, 1))).sqrt();
    for (Index c : f.channels) {
      data.col(c).segment(f.start, f.end - f.start).array() += f.magnitude * sd(c);
      sidecar << f.start << ',' << f.end << ',' << c << ',' << format_double(f.magnitude) << '\n';
    }
  }

  std::vector<std::string> header;
  for (Index c = 0; c < spec.m; ++c) {
    header.push_back("x" + std::to_string(c + 1));
  }
  write_csv(opts.out, header, data);
  log << "rows " << data.rows() << '\n' << "columns " << data.cols() << '\n';
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Latent dynamic model training and process monitoring"};
  app.require_subcommand(1);

  CommandOptions opts;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "ini-style configuration file");
    sub->add_option("--seed", opts.seed, "override every seed in the config");
    sub->add_option("--alpha", opts.alpha, "confidence level for the control limits");
  };

  CLI::App* train = app.add_subcommand("train", "fit a model on normal data");
  train->add_option("--data", opts.data, "training CSV")->required();
  train->add_option("--model", opts.model, "output model file")->required();
  train->add_option("--trace", opts.trace, "optional training trace CSV");
  add_common(train);

  CLI::App* score = app.add_subcommand("score", "monitor new data with a trained model");
  score->add_option("--model", opts.model, "model file")->required();
  score->add_option("--data", opts.data, "CSV to score")->required();
  score->add_option("--out", opts.out, "report CSV")->required();

  CLI::App* sel = app.add_subcommand("select", "hold-out selection of (r, s)");
  sel->add_option("--data", opts.data, "normal-operation CSV")->required();
  sel->add_option("--out", opts.out, "scoreboard CSV")->required();
  add_common(sel);

  CLI::App* sim = app.add_subcommand("simulate", "write synthetic data from the model");
  sim->add_option("--out", opts.out, "output CSV (fault windows go to <out>.faults.csv)")
    ->required();
  add_common(sim);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: config\n" << e.what() << '\n';
    return static_cast<int>(ErrorCategory::config);
  }

  try {
    if (train->parsed()) {
      cmd_train(opts, out);
    } else if (score->parsed()) {
      cmd_score(opts, out);
    } else if (sel->parsed()) {
      cmd_select(opts, out);
    } else {
      cmd_simulate(opts, out);
    }
  } catch (const Error& e) {
    err << "error: " << category_name(e.category()) << '\n' << e.what() << '\n';
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    err << "error: numeric\n" << e.what() << '\n';
    return static_cast<int>(ErrorCategory::numeric);
  }
  return 0;
}

} // namespace ppfa::app
