#include "fracspace/cli.hpp"
#include "fracspace/discrete_operators.hpp"
#include "fracspace/error.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

using namespace fracspace;

namespace {

struct Overrides {
  std::string config;
  std::vector<double> thetas;
  std::vector<int> sizes;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;
};

void add_overrides(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
  app->add_option("--theta", o.thetas, "theta values (repeat or comma-separate)")->delimiter(',');
  app->add_option("--size", o.sizes, "grid sizes / mode counts (repeat or comma-separate)")->delimiter(',');
  app->add_option("--seed", o.seed, "random seed (beats FRACSPACE_SEED)");
  app->add_option("--out", o.out, "output directory");
  app->add_option("--format", o.format, "csv, json or both")->check(CLI::IsMember({"csv", "json", "both"}));
}

RunConfig resolve(const std::string& experiment, const Overrides& o) {
  RunConfig c;
  if (!o.config.empty()) {
    c = load_config(o.config);
    if (!experiment.empty() && c.experiment != experiment)
      throw Error(ErrorCode::InvalidConfig, "config is for '" + c.experiment + "', not '" + experiment + "'");
  } else {
    if (experiment.empty()) throw Error(ErrorCode::InvalidConfig, "run needs --config");
    c = parse_config({{"experiment", experiment}});
  }
  apply_environment(c);
  if (!o.thetas.empty()) c.thetas = o.thetas;
  if (!o.sizes.empty()) c.sizes = o.sizes;
  if (o.seed) c.seed = *o.seed;
  if (!o.out.empty()) c.output_dir = o.out;
  if (!o.format.empty()) c.format = o.format;
  return c;
}

int do_run(const RunConfig& c) {
  const RunResult res = run(c);
  const Summary s = res.report.summary();
  std::cout << c.experiment << ": " << s.pass_count << "/" << s.cell_count << " cells pass";
  if (s.worst_ratio) std::cout << ", worst ratio " << format_double(*s.worst_ratio);
  std::cout << "\n";
  for (const auto& f : res.files) std::cout << "  " << f.string() << "\n";
  return exit_status(res.report);
}

int do_export(const std::string& what, int dim, int n, const std::string& format, const std::string& out) {
  const GridDomain dom = GridDomain::make(dim, n);
  Matrix m;
  if (what == "laplacian") {
    m = laplacian_fd_matrix(dom);
  } else if (what == "g0" || what == "g1" || what == "g2") {
    const SobolevGrams g = sobolev_grams(dom);
    m = what == "g0" ? g.g0 : what == "g1" ? g.g1 : g.g2;
  } else {
    const StokesSystem sys = build_stokes(dom);
    if (what == "vector-laplacian") m = sys.vector_laplacian;
    else if (what == "divergence") m = sys.divergence;
    else if (what == "nullbasis") m = sys.nullbasis;
    else m = sys.constrained_op;
  }
  std::ofstream file;
  if (!out.empty()) {
    file.open(out, std::ios::binary);
    if (!file) throw Error(ErrorCode::IoError, "cannot write " + out);
  }
  std::ostream& os = out.empty() ? std::cout : file;
  if (format == "json") os << matrix_to_json(m).dump() << "\n";
  else write_matrix_csv(os, m);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fracspace: checks for fractional power spaces, the K-functional and Stokes/Leray retractions"};
  app.require_subcommand(1);
  app.set_version_flag("--version", FRACSPACE_VERSION);

  app.add_subcommand("list", "list registered experiments");

  Overrides run_o;
  CLI::App* run_cmd = app.add_subcommand("run", "run the experiment named in --config");
  add_overrides(run_cmd, run_o);

  std::string ex_what = "laplacian", ex_format = "csv", ex_out;
  int ex_dim = 2, ex_n = 8;
  CLI::App* export_cmd = app.add_subcommand("export", "write a discrete operator as dense row-major CSV or JSON");
  export_cmd->add_option("what", ex_what, "laplacian | g0 | g1 | g2 | vector-laplacian | divergence | nullbasis | constrained")
      ->check(CLI::IsMember({"laplacian", "g0", "g1", "g2", "vector-laplacian", "divergence", "nullbasis", "constrained"}));
  export_cmd->add_option("--dim", ex_dim, "1 or 2")->check(CLI::IsMember({1, 2}));
  export_cmd->add_option("--size", ex_n, "interior nodes (cells for Stokes) per axis");
  export_cmd->add_option("--format", ex_format)->check(CLI::IsMember({"csv", "json"}));
  export_cmd->add_option("--out", ex_out, "file (stdout when omitted)");

  std::vector<std::pair<std::string, CLI::App*>> experiment_cmds;
  std::vector<Overrides> exp_o(list_experiments().size());
  for (std::size_t i = 0; i < list_experiments().size(); ++i) {
    const auto& info = list_experiments()[i];
    CLI::App* sub = app.add_subcommand(info.name, info.doc);
    add_overrides(sub, exp_o[i]);
    experiment_cmds.emplace_back(info.name, sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand("list")) {
      for (const auto& info : list_experiments()) std::cout << info.name << "\t" << info.doc << "\n";
      return 0;
    }
    if (export_cmd->parsed()) {
      if (ex_what != "laplacian" && ex_what[0] != 'g' && ex_dim != 2)
        throw Error(ErrorCode::InvalidConfig, "Stokes operators are 2D only");
      return do_export(ex_what, ex_dim, ex_n, ex_format, ex_out);
    }
    if (run_cmd->parsed()) return do_run(resolve("", run_o));
    for (std::size_t i = 0; i < experiment_cmds.size(); ++i)
      if (experiment_cmds[i].second->parsed()) return do_run(resolve(experiment_cmds[i].first, exp_o[i]));
  } catch (const Error& e) {
    std::cerr << error_json(e).dump() << "\n";
    return exit_status(e);
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "Internal"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return 2;
}
