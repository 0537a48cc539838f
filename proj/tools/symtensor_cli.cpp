// symtensor_cli: verify, bench, model and storage commands.

#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "symtensor/driver.hpp"

namespace cli = symtensor::cli;

namespace {

template <class T>
void copy_opt(const CLI::Option* opt, const T& value, std::optional<T>& dst) {
  if (opt->count() > 0) dst = value;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symmetric tensor change of basis with blocked compact storage"};
  app.option_defaults()->always_capture_default();

  cli::RunConfig cfg;
  const std::map<std::string, cli::Command> commands{
      {"verify", cli::Command::Verify},
      {"bench", cli::Command::Bench},
      {"model", cli::Command::Model},
      {"storage", cli::Command::Storage}};
  const std::map<std::string, cli::Algo> algos{{"naive", cli::Algo::Naive},
                                               {"scalar", cli::Algo::Scalar},
                                               {"dense", cli::Algo::Dense},
                                               {"bcss", cli::Algo::Bcss},
                                               {"all", cli::Algo::All}};
  const std::map<std::string, cli::ModelSweep> sweeps{
      {"point", cli::ModelSweep::Point},
      {"fixed-block", cli::ModelSweep::FixedBlock},
      {"fixed-grid", cli::ModelSweep::FixedGrid}};

  std::size_t m = 0, n = 0, p = 0, ba = 0, bc = 0, fault = 0;
  app.add_option("--cmd", cfg.command, "verify | bench | model | storage")
      ->required()
      ->transform(CLI::CheckedTransformer(commands, CLI::ignore_case));
  auto* m_opt = app.add_option("--m", m, "tensor order");
  auto* n_opt = app.add_option("--n", n, "dimension of A");
  auto* p_opt = app.add_option("--p", p, "rows of X (dimension of C); defaults to n");
  auto* ba_opt = app.add_option("--ba", ba, "block dimension of A");
  auto* bc_opt = app.add_option("--bc", bc, "block dimension of C; defaults to --ba");
  app.add_option("--seed", cfg.seed, "random seed");
  app.add_option("--reps", cfg.reps, "timing repetitions (median reported)");
  app.add_option("--algo", cfg.algo, "naive | scalar | dense | bcss | all")
      ->transform(CLI::CheckedTransformer(algos, CLI::ignore_case));
  app.add_option("--out", cfg.out, "write command output to this file");
  app.add_flag("--csv", cfg.csv, "CSV output for verify and storage");
  app.add_option("--sweep", cfg.sweep, "model sweep: point | fixed-block | fixed-grid")
      ->transform(CLI::CheckedTransformer(sweeps, CLI::ignore_case));
  app.add_option("--nbar", cfg.nbar, "blocks per mode for --sweep fixed-grid");
  app.add_option("--meta-k", cfg.meta_k, "meta-data words per grid entry");
  auto* fault_opt =
      app.add_option("--inject-fault", fault, "verify: corrupt this output block slot");
  app.add_option("--input", cfg.input, "verify: load A from an STNS file");
  app.add_option("--save", cfg.save, "verify: save the reference C as an STNS file");
  app.add_flag("--strict", cfg.strict, "treat informational checks as failures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kExitUsage;
  }
  copy_opt(m_opt, m, cfg.m);
  copy_opt(n_opt, n, cfg.n);
  copy_opt(p_opt, p, cfg.p);
  copy_opt(ba_opt, ba, cfg.b_a);
  copy_opt(bc_opt, bc, cfg.b_c);
  copy_opt(fault_opt, fault, cfg.inject_fault);

  try {
    cfg.max_dense_elems = cli::max_dense_elems_from_env();
  } catch (const symtensor::ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitUsage;
  }

  if (cfg.out.empty()) return cli::run(cfg, std::cout, std::cerr);
  std::ofstream out(cfg.out);
  if (!out) {
    std::cerr << "error: cannot open " << cfg.out << '\n';
    return cli::kExitUsage;
  }
  return cli::run(cfg, out, std::cerr);
}
