// Command-line front-end: PLR decomposition of a matrix file, maximum
// likelihood fits, model comparison reports, and kurtosis diagnostics for
// grouped multivariate data.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "orthofit/cpc.hpp"
#include "orthofit/dataset.hpp"
#include "orthofit/errors.hpp"
#include "orthofit/inference.hpp"
#include "orthofit/plr.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace orthofit;

// ---------------------------------------------------------------------------
// Shared option plumbing

struct DataOptions {
  std::string path;
  std::string group_column;
  std::vector<std::string> variables;
  bool log_transform = false;
};

struct OutputOptions {
  std::string format = "json";
  std::string out_path;  // empty: stdout
};

struct OptimizerOptions {
  std::string driver = "auto";
  std::size_t nm_max_iter = 5000;
  std::size_t bfgs_max_iter = 500;
  double f_tol = 1e-10;
  double x_tol = 1e-10;
  int restarts = 1;
};

void add_data_options(CLI::App* cmd, DataOptions& opts) {
  cmd->add_option("--data", opts.path, "CSV file with one row per observation")
      ->required();
  cmd->add_option("--group", opts.group_column, "column holding the group label")
      ->required();
  cmd->add_option("--vars", opts.variables,
                  "comma-separated numeric variable columns (at least two)")
      ->required()
      ->delimiter(',');
  cmd->add_flag("--log", opts.log_transform,
                "natural-log transform of every variable column");
}

void add_output_options(CLI::App* cmd, OutputOptions& opts) {
  cmd->add_option("--format", opts.format, "output format")
      ->check(CLI::IsMember({"json", "table"}))
      ->capture_default_str();
  cmd->add_option("--out", opts.out_path, "write output to this path instead of stdout");
}

void add_optimizer_options(CLI::App* cmd, OptimizerOptions& opts) {
  cmd->add_option("--driver", opts.driver, "optimizer driver")
      ->check(CLI::IsMember({"auto", "nm", "bfgs"}))
      ->capture_default_str();
  cmd->add_option("--nm-max-iter", opts.nm_max_iter, "Nelder-Mead iteration budget")
      ->capture_default_str();
  cmd->add_option("--bfgs-max-iter", opts.bfgs_max_iter, "BFGS iteration budget")
      ->capture_default_str();
  cmd->add_option("--f-tol", opts.f_tol, "objective convergence tolerance")
      ->capture_default_str();
  cmd->add_option("--x-tol", opts.x_tol, "simplex width convergence tolerance")
      ->capture_default_str();
  cmd->add_option("--restarts", opts.restarts,
                  "re-launch from the incumbent until no improvement (0 disables)")
      ->capture_default_str();
}

FitOptions to_fit_options(const OptimizerOptions& o) {
  FitOptions f;
  if (o.driver == "nm") {
    f.driver = FitOptions::Driver::NelderMeadOnly;
  } else if (o.driver == "bfgs") {
    f.driver = FitOptions::Driver::BfgsOnly;
  } else {
    f.driver = FitOptions::Driver::Auto;
  }
  f.nm_max_iter = o.nm_max_iter;
  f.bfgs_max_iter = o.bfgs_max_iter;
  f.f_tol = o.f_tol;
  f.x_tol = o.x_tol;
  f.restarts = o.restarts;
  return f;
}

// A relative --data path that does not exist is retried under
// ORTHOFIT_DATA_DIR (first the whole relative path, then the bare name), so
// installed layouts can point at the bundled data from anywhere.
std::string resolve_data_path(const std::string& given) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::exists(given, ec)) return given;
  if (!fs::path(given).is_absolute()) {
    if (const char* env = std::getenv("ORTHOFIT_DATA_DIR")) {
      const fs::path base(env);
      for (const fs::path& candidate :
           {base / given, base / fs::path(given).filename()}) {
        if (fs::exists(candidate, ec)) return candidate.string();
      }
    }
  }
  return given;
}

GroupedDataset load_dataset(const DataOptions& opts, std::string* resolved_path) {
  const std::string path = resolve_data_path(opts.path);
  if (resolved_path) *resolved_path = path;
  const CsvTable table = read_csv_file(path);
  DatasetConfig config;
  config.group_column = opts.group_column;
  config.variable_columns = opts.variables;
  config.log_transform = opts.log_transform;
  return make_grouped(table, config);
}

void emit(const OutputOptions& opts, const std::string& text) {
  if (opts.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(opts.out_path, std::ios::binary);
  if (!out) {
    throw ParseError("cannot write '" + opts.out_path + "'");
  }
  out << text;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// ---------------------------------------------------------------------------
// JSON helpers

json matrix_json(const DenseMatrix& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

json dataset_json(const std::string& path, const DataOptions& opts,
                  const GroupedDataset& data) {
  json groups = json::array();
  for (std::size_t j = 0; j < data.k(); ++j) {
    groups.push_back(json{{"name", data.name(j)}, {"n", data.n(j)}});
  }
  return json{{"path", path},
              {"group_column", opts.group_column},
              {"variables", opts.variables},
              {"log_transform", opts.log_transform},
              {"n", data.n_total()},
              {"d", data.d()},
              {"groups", groups}};
}

json params_json(const ParamSet& p) {
  json q = json::array();
  for (const auto& rot : p.q) q.push_back(matrix_json(rot.matrix()));
  json perms = json::array();
  for (const auto& perm : p.p_frozen) perms.push_back(perm.mapping());
  json out{{"mu", p.mu}, {"q", q}, {"p_frozen", perms}, {"lambda", p.lambda}};
  if (!p.beta.empty()) out["beta"] = p.beta;
  return out;
}

json fit_json(const FitResult& r) {
  json out;
  out["model"] = model_name(r.params.spec);
  out["loglik"] = r.loglik;
  out["m"] = r.m;
  out["n"] = r.n;
  out["parameters"] = params_json(r.params);
  if (!r.beta_clamped.empty()) {
    json flags = json::array();
    for (bool b : r.beta_clamped) flags.push_back(b);
    out["beta_clamped"] = flags;
  }
  if (r.stationarity_residual) {
    out["stationarity_residual"] = *r.stationarity_residual;
  }
  json optim{{"iterations", r.optim.iterations}, {"converged", r.optim.converged}};
  optim["gradient_norm"] =
      r.optim.gradient_norm ? json(*r.optim.gradient_norm) : json(nullptr);
  out["optimizer"] = optim;
  return out;
}

// ---------------------------------------------------------------------------
// Table rendering

void render_fit_table(std::ostream& os, const GroupedDataset& data,
                      const FitResult& r) {
  os << "model " << model_name(r.params.spec) << "\n";
  os << "  loglik " << fixed(r.loglik, 3) << "   m " << r.m << "   n " << r.n << "\n";
  const bool common_q = r.params.spec.structure == ModelStructure::Cpc;
  if (common_q) {
    os << "  common rotation:\n";
    const DenseMatrix& q = r.params.q[0].matrix();
    for (std::size_t i = 0; i < q.rows(); ++i) {
      os << "   ";
      for (std::size_t j = 0; j < q.cols(); ++j) os << " " << fixed(q(i, j), 3);
      os << "\n";
    }
  }
  for (std::size_t j = 0; j < data.k(); ++j) {
    os << "  group " << data.name(j) << " (n " << data.n(j) << ")\n";
    os << "    mean:";
    for (double v : r.params.mu[j]) os << " " << fixed(v, 3);
    os << "\n";
    // Table convention: eigenvalues scaled by 100.
    os << "    eigenvalues (x100):";
    for (double v : r.params.lambda[j]) os << " " << fixed(100.0 * v, 3);
    os << "\n";
    if (!r.params.beta.empty()) {
      os << "    beta: " << fixed(r.params.beta[j], 3);
      if (!r.beta_clamped.empty() && r.beta_clamped[j]) os << " (clamped at start)";
      os << "\n";
    }
    if (!common_q) {
      os << "    rotation:\n";
      const DenseMatrix& q = r.params.q[j].matrix();
      for (std::size_t a = 0; a < q.rows(); ++a) {
        os << "     ";
        for (std::size_t b = 0; b < q.cols(); ++b) os << " " << fixed(q(a, b), 3);
        os << "\n";
      }
    }
  }
  if (r.stationarity_residual) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3e", *r.stationarity_residual);
    os << "  stationarity residual " << buf << "\n";
  }
  os << "  optimizer: iterations " << r.optim.iterations << ", converged "
     << (r.optim.converged ? "yes" : "no") << "\n";
}

void render_compare_table(std::ostream& os, const ComparisonReport& report) {
  os << "model      loglik   m       AIC       BIC\n";
  for (const auto& row : report.information) {
    char line[128];
    std::snprintf(line, sizeof(line), "%-7s %9.3f %3zu %9.3f %9.3f\n",
                  model_name(row.spec).c_str(), row.loglik, row.m, row.aic, row.bic);
    os << line;
  }
  os << "\nlikelihood-ratio tests (null vs alternative; non-nested pairs omitted)\n";
  os << "null    alt        stat  df      p\n";
  for (const auto& row : report.tests) {
    char line[128];
    std::snprintf(line, sizeof(line), "%-7s %-7s %7.3f %3zu  %5.3f\n",
                  model_name(row.null_spec).c_str(), model_name(row.alt_spec).c_str(),
                  row.test.statistic, row.test.df, row.test.p_value);
    os << line;
  }
}

// ---------------------------------------------------------------------------
// Commands

int run_decompose(const std::string& path, const OutputOptions& out_opts) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    for (char& c : line) {
      if (c == ',' || c == '\t' || c == '\r') c = ' ';
    }
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw ParseError("cannot parse '" + tok + "' at line " +
                         std::to_string(line_no));
      }
      row.push_back(v);
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("no matrix entries in '" + path + "'");
  const std::size_t d = rows.size();
  std::vector<double> flat;
  flat.reserve(d * d);
  for (const auto& row : rows) {
    if (row.size() != d) {
      throw ParseError("matrix is not square: " + std::to_string(d) + " rows but a row of " +
                       std::to_string(row.size()) + " entries");
    }
    flat.insert(flat.end(), row.begin(), row.end());
  }

  const OrthogonalMatrix q{DenseMatrix(d, d, std::move(flat))};
  const PLRFactors factors = plr_decompose(q);
  const std::vector<int> signs = plr_column_signs(q);

  // Reconstruction with the sign diagnostic applied restores Q exactly;
  // the Frobenius error below measures that rebuild.
  const OrthogonalMatrix rebuilt = plr_compose(factors.p, factors.l);
  DenseMatrix adjusted = rebuilt.matrix();
  for (std::size_t j = 0; j < d; ++j) {
    if (signs[j] < 0) {
      for (std::size_t i = 0; i < d; ++i) adjusted(i, j) = -adjusted(i, j);
    }
  }
  const double err = frobenius_norm(subtract(adjusted, q.matrix()));

  std::ostringstream os;
  os << "order: " << d << "\n";
  os << "p:";
  for (std::size_t v : factors.p.mapping()) os << " " << v;
  os << "\n";
  os << "l:";
  for (double v : factors.l.sub_diagonal()) os << " " << format_double(v);
  os << "\n";
  os << "column_signs:";
  for (int s : signs) os << " " << s;
  os << "\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3e", err);
  os << "reconstruction_error: " << buf << "\n";
  emit(out_opts, os.str());
  return 0;
}

int run_fit(const DataOptions& data_opts, const OutputOptions& out_opts,
            const OptimizerOptions& optim_opts,
            const std::vector<std::string>& model_names) {
  std::vector<ModelSpec> specs;
  for (const auto& name : model_names) {
    const auto spec = parse_model_name(name);
    if (!spec) throw ParseError("unknown model '" + name + "'");
    specs.push_back(*spec);
  }

  std::string path;
  const GroupedDataset data = load_dataset(data_opts, &path);
  const FitOptions fit_opts = to_fit_options(optim_opts);

  std::vector<FitResult> results;
  results.reserve(specs.size());
  for (const auto& spec : specs) results.push_back(fit(data, spec, fit_opts));

  if (out_opts.format == "table") {
    std::ostringstream os;
    for (const auto& r : results) render_fit_table(os, data, r);
    emit(out_opts, os.str());
    return 0;
  }
  json out{{"schema", 1},
           {"command", "fit"},
           {"data", dataset_json(path, data_opts, data)}};
  json models = json::array();
  for (const auto& r : results) models.push_back(fit_json(r));
  out["models"] = models;
  emit(out_opts, out.dump(2) + "\n");
  return 0;
}

int run_compare(const DataOptions& data_opts, const OutputOptions& out_opts,
                const OptimizerOptions& optim_opts) {
  std::string path;
  const GroupedDataset data = load_dataset(data_opts, &path);
  const FitOptions fit_opts = to_fit_options(optim_opts);

  const std::vector<ModelSpec> all = {
      ModelSpec{ModelFamily::Normal, ModelStructure::Cpc},
      ModelSpec{ModelFamily::LeptokurticNormal, ModelStructure::Cpc},
      ModelSpec{ModelFamily::Normal, ModelStructure::Unconstrained},
      ModelSpec{ModelFamily::LeptokurticNormal, ModelStructure::Unconstrained},
  };
  std::vector<FitResult> results;
  std::vector<ModelScore> scores;
  for (const auto& spec : all) {
    results.push_back(fit(data, spec, fit_opts));
    scores.push_back(ModelScore{spec, results.back().loglik, results.back().m});
  }
  const ComparisonReport report = build_comparison(scores, data.n_total());

  if (out_opts.format == "table") {
    std::ostringstream os;
    render_compare_table(os, report);
    emit(out_opts, os.str());
    return 0;
  }

  json info = json::array();
  for (const auto& row : report.information) {
    info.push_back(json{{"model", model_name(row.spec)},
                        {"loglik", row.loglik},
                        {"m", row.m},
                        {"aic", row.aic},
                        {"bic", row.bic}});
  }
  json tests = json::array();
  for (const auto& row : report.tests) {
    tests.push_back(json{{"null", model_name(row.null_spec)},
                         {"alt", model_name(row.alt_spec)},
                         {"statistic", row.test.statistic},
                         {"df", row.test.df},
                         {"p_value", row.test.p_value}});
  }
  const auto best_by = [&](auto value) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < report.information.size(); ++i) {
      if (value(report.information[i]) > value(report.information[best])) best = i;
    }
    return model_name(report.information[best].spec);
  };
  json out{{"schema", 1},
           {"command", "compare"},
           {"data", dataset_json(path, data_opts, data)},
           {"n", report.n},
           {"information", info},
           {"tests", tests},
           {"best_aic", best_by([](const InformationRow& r) { return r.aic; })},
           {"best_bic", best_by([](const InformationRow& r) { return r.bic; })}};
  json fits = json::array();
  for (const auto& r : results) fits.push_back(fit_json(r));
  out["models"] = fits;
  emit(out_opts, out.dump(2) + "\n");
  return 0;
}

int run_kurtosis(const DataOptions& data_opts, const OutputOptions& out_opts) {
  std::string path;
  const GroupedDataset data = load_dataset(data_opts, &path);

  std::vector<MardiaResult> tests;
  for (std::size_t j = 0; j < data.k(); ++j) {
    tests.push_back(mardia_kurtosis_test(data.group(j)));
  }

  if (out_opts.format == "table") {
    std::ostringstream os;
    os << "group            n   excess        z       p\n";
    for (std::size_t j = 0; j < data.k(); ++j) {
      char line[160];
      std::snprintf(line, sizeof(line), "%-14s %5zu %8.3f %8.3f  %6.3f\n",
                    data.name(j).c_str(), data.n(j), tests[j].excess, tests[j].z,
                    tests[j].p_value);
      os << line;
    }
    emit(out_opts, os.str());
    return 0;
  }

  json groups = json::array();
  for (std::size_t j = 0; j < data.k(); ++j) {
    groups.push_back(json{{"name", data.name(j)},
                          {"n", data.n(j)},
                          {"excess", tests[j].excess},
                          {"z", tests[j].z},
                          {"p_value", tests[j].p_value}});
  }
  json out{{"schema", 1},
           {"command", "kurtosis"},
           {"data", dataset_json(path, data_opts, data)},
           {"groups", groups}};
  emit(out_opts, out.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"orthogonal-matrix parameterization and common principal component fitting"};
  app.require_subcommand(1);

  // decompose
  std::string matrix_path;
  OutputOptions decompose_out;
  CLI::App* decompose =
      app.add_subcommand("decompose", "PLR-decompose an orthogonal matrix file");
  decompose->add_option("matrix", matrix_path, "whitespace/comma separated square matrix")
      ->required();
  decompose->add_option("--out", decompose_out.out_path,
                        "write output to this path instead of stdout");

  // fit
  DataOptions fit_data;
  OutputOptions fit_out;
  OptimizerOptions fit_optim;
  std::vector<std::string> fit_models;
  CLI::App* fit_cmd = app.add_subcommand("fit", "maximum likelihood fit of chosen models");
  add_data_options(fit_cmd, fit_data);
  fit_cmd->add_option("--models", fit_models,
                      "comma-separated subset of n-cpc,ln-cpc,n-pc,ln-pc")
      ->required()
      ->delimiter(',');
  add_output_options(fit_cmd, fit_out);
  add_optimizer_options(fit_cmd, fit_optim);

  // compare
  DataOptions cmp_data;
  OutputOptions cmp_out;
  OptimizerOptions cmp_optim;
  CLI::App* cmp_cmd =
      app.add_subcommand("compare", "fit all four models and report AIC/BIC and LR tests");
  add_data_options(cmp_cmd, cmp_data);
  add_output_options(cmp_cmd, cmp_out);
  add_optimizer_options(cmp_cmd, cmp_optim);

  // kurtosis
  DataOptions kurt_data;
  OutputOptions kurt_out;
  CLI::App* kurt_cmd =
      app.add_subcommand("kurtosis", "per-group excess kurtosis and Mardia test");
  add_data_options(kurt_cmd, kurt_data);
  add_output_options(kurt_cmd, kurt_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (decompose->parsed()) return run_decompose(matrix_path, decompose_out);
    if (fit_cmd->parsed()) return run_fit(fit_data, fit_out, fit_optim, fit_models);
    if (cmp_cmd->parsed()) return run_compare(cmp_data, cmp_out, cmp_optim);
    if (kurt_cmd->parsed()) return run_kurtosis(kurt_data, kurt_out);
  } catch (const NotOrthogonal& e) {
    std::cerr << "orthofit: " << e.what() << "\n";
    return 2;
  } catch (const DegenerateGroup& e) {
    std::cerr << "orthofit: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "orthofit: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "orthofit: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
