// Command-line front end for the sequence-space workbench.
//
// Subcommands:
//   validate   <config>            parse + axiom-check a space definition
//   classify   <config>            full condition + dimension profile
//   check      <U|N|B|M|log> <config>
//   witness    <non-algebra|non-idempotent> <config>
//   approx-id  <config>            multiplier-net convergence report
//   hadamard                       coefficientwise products of Taylor series
//   report     <dir>               aggregate written *.profile.json files
//
// Exit codes: 0 ok, 1 bad input, 2 unmet hypothesis, 3 internal fault.
// The KOETHE_SEED environment variable (default 0) seeds every sampled
// battery, so runs are reproducible byte for byte.

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "koethe/approx.hpp"
#include "koethe/classifier.hpp"
#include "koethe/conditions.hpp"
#include "koethe/errors.hpp"
#include "koethe/relations.hpp"
#include "koethe/sequences.hpp"
#include "koethe/space_config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t env_seed() {
  const char* s = std::getenv("KOETHE_SEED");
  if (!s || !*s) return 0;
  char* end = nullptr;
  unsigned long long v = std::strtoull(s, &end, 10);
  if (end == s || *end != '\0')
    throw koethe::ConfigError("KOETHE_SEED must be a nonnegative integer");
  return static_cast<std::uint64_t>(v);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw koethe::ConfigError("cannot write " + path.string());
  out << text;
}

json verdict_json(const koethe::Verdict& v) {
  json j;
  koethe::to_json(j, v);
  return j;
}

json log_array(const std::vector<koethe::LogValue>& xs) {
  json a = json::array();
  for (const koethe::LogValue& x : xs) a.push_back(x.log_d());
  return a;
}

// Coefficient CSV: one row per index, optionally with a header line.
// Accepted row shapes: "n,re,im", "re,im", or "re".
koethe::CoeffSeq seq_from_csv(const fs::path& path, std::size_t N) {
  std::ifstream in(path);
  if (!in) throw koethe::ConfigError("cannot read " + path.string());
  koethe::CoeffSeq out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      fields.push_back(line.substr(pos, comma == std::string::npos ? comma : comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    std::vector<double> nums;
    bool numeric = true;
    for (const std::string& f : fields) {
      try {
        std::size_t used = 0;
        nums.push_back(std::stod(f, &used));
        while (used < f.size() && std::isspace(static_cast<unsigned char>(f[used]))) ++used;
        if (used != f.size()) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
      if (!numeric) break;
    }
    if (!numeric) {
      if (first) { first = false; continue; }  // header line
      throw koethe::ConfigError("bad coefficient row in " + path.string() + ": '" + line + "'");
    }
    first = false;
    if (nums.size() >= 3) out.emplace_back(nums[1], nums[2]);
    else if (nums.size() == 2) out.emplace_back(nums[0], nums[1]);
    else out.emplace_back(nums[0], 0.0);
  }
  out.resize(N, {0.0, 0.0});
  return out;
}

koethe::CoeffSeq seq_from_spec(const std::string& spec, std::size_t N) {
  using koethe::ConfigError;
  if (spec == "geometric") return koethe::taylor_geometric(N);
  if (spec == "exp") return koethe::taylor_exp(N);
  if (fs::exists(spec) && fs::is_regular_file(spec)) return seq_from_csv(spec, N);
  if (spec.rfind("poly:", 0) == 0) {
    std::vector<std::complex<double>> coeffs;
    std::string rest = spec.substr(5);
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      std::size_t comma = rest.find(',', pos);
      std::string tok = rest.substr(pos, comma == std::string::npos ? comma : comma - pos);
      try {
        coeffs.emplace_back(std::stod(tok), 0.0);
      } catch (const std::exception&) {
        throw ConfigError("bad polynomial coefficient: '" + tok + "'");
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (coeffs.empty()) throw ConfigError("poly: needs at least one coefficient");
    return koethe::taylor_poly(coeffs, N);
  }
  throw ConfigError("unknown coefficient spec '" + spec +
                    "' (use geometric, exp, poly:c0,c1,..., or a CSV path)");
}

struct Effective {
  std::uint64_t depth;
  std::uint64_t levels;
  long double epsilon;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"workbench for weighted sequence-space algebras"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t opt_depth = 10000;
  std::uint64_t opt_levels = 8;
  double opt_epsilon = 1e-6;
  std::string opt_out = ".";
  std::string opt_format = "json";
  auto* depth_opt = app.add_option("--depth", opt_depth, "scan depth (default 10000)");
  auto* levels_opt =
      app.add_option("--levels", opt_levels, "level budget (default 8)");
  auto* epsilon_opt =
      app.add_option("--epsilon", opt_epsilon, "tolerance (default 1e-6)");
  app.add_option("--out", opt_out, "output directory (default .)");
  app.add_option("--format", opt_format, "output format")
      ->check(CLI::IsMember({"json", "csv"}));

  // validate
  std::string validate_path;
  auto* cmd_validate = app.add_subcommand("validate", "parse and axiom-check a space");
  cmd_validate->add_option("config", validate_path, "space config JSON")->required();

  // classify
  std::string classify_path;
  auto* cmd_classify =
      app.add_subcommand("classify", "condition profile and dimension table");
  cmd_classify->add_option("config", classify_path, "space config JSON")->required();

  // check
  std::string check_which, check_path;
  auto* cmd_check = app.add_subcommand("check", "run a single condition oracle");
  cmd_check->add_option("which", check_which, "U | N | B | M | log")
      ->required()
      ->check(CLI::IsMember({"U", "N", "B", "M", "log"}));
  cmd_check->add_option("config", check_path, "space config JSON")->required();

  // witness
  std::string witness_kind, witness_path;
  std::uint64_t witness_kmax = 1000;
  bool witness_force = false;
  auto* cmd_witness = app.add_subcommand("witness", "construct a counterexample element");
  cmd_witness->add_option("kind", witness_kind, "non-algebra | non-idempotent")
      ->required()
      ->check(CLI::IsMember({"non-algebra", "non-idempotent"}));
  cmd_witness->add_option("config", witness_path, "space config JSON")->required();
  cmd_witness->add_option("--k-max", witness_kmax,
                          "number of superposed spikes (non-algebra)");
  cmd_witness->add_flag("--force", witness_force,
                        "build even when the algebra question is undecided");

  // approx-id
  std::string approx_path, approx_element = "2^(-i)";
  std::uint64_t approx_plevel = 1, approx_nfrom = 10, approx_nto = 100;
  std::uint64_t approx_q = 0;
  auto* cmd_approx =
      app.add_subcommand("approx-id", "multiplier-net convergence report");
  cmd_approx->add_option("config", approx_path, "space config JSON")->required();
  cmd_approx->add_option("--element", approx_element,
                         "coefficient rule for the element a (default 2^(-i))");
  cmd_approx->add_option("--p-level", approx_plevel, "base level (default 1)");
  cmd_approx->add_option("--n-from", approx_nfrom, "first step (default 10)");
  cmd_approx->add_option("--n-to", approx_nto, "last step (default 100)");
  cmd_approx->add_option("--q-level", approx_q, "force the capture level q");

  // hadamard
  std::string had_f = "geometric", had_g = "geometric";
  std::uint64_t had_N = 16;
  auto* cmd_had = app.add_subcommand("hadamard", "coefficientwise Taylor product");
  cmd_had->add_option("--f", had_f, "left factor: geometric | exp | poly:c0,c1,...");
  cmd_had->add_option("--g", had_g, "right factor spec");
  cmd_had->add_option("--N", had_N, "number of coefficients (default 16)");

  // report
  std::string report_dir;
  auto* cmd_report = app.add_subcommand("report", "aggregate *.profile.json files");
  cmd_report->add_option("dir", report_dir, "directory of profiles")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    auto effective = [&](const koethe::SpaceConfig& cfg) {
      Effective eff{cfg.analysis.depth, cfg.analysis.level_budget, cfg.analysis.epsilon};
      if (depth_opt->count()) eff.depth = opt_depth;
      if (levels_opt->count()) eff.levels = opt_levels;
      if (epsilon_opt->count()) eff.epsilon = static_cast<long double>(opt_epsilon);
      if (eff.depth == 0 || eff.levels == 0)
        throw koethe::ConfigError("--depth and --levels must be positive");
      return eff;
    };

    if (*cmd_validate) {
      koethe::SpaceConfig cfg = koethe::load_space_config(validate_path);
      std::cout << dump({{"ok", true},
                         {"name", cfg.name},
                         {"family", koethe::family_to_json(cfg.family)}});
      return 0;
    }

    if (*cmd_classify) {
      koethe::SpaceConfig cfg = koethe::load_space_config(classify_path);
      Effective eff = effective(cfg);
      koethe::ConditionProfile cond =
          koethe::profile_conditions(cfg.family, eff.depth, eff.levels);
      koethe::HomologicalProfile prof = koethe::classify(cond);
      json out{{"name", cfg.name},
               {"conditions", cond.to_json()},
               {"profile", prof.to_json()},
               {"consistency", koethe::consistency_check(prof)}};
      fs::path dir(opt_out);
      fs::create_directories(dir);
      write_text(dir / (cfg.name + ".profile.json"), dump(out));
      std::cout << dump(out);
      return 0;
    }

    if (*cmd_check) {
      koethe::SpaceConfig cfg = koethe::load_space_config(check_path);
      Effective eff = effective(cfg);
      koethe::Verdict v;
      if (check_which == "U")
        v = koethe::check_U(cfg.family, eff.depth, eff.levels);
      else if (check_which == "N")
        v = koethe::check_N(cfg.family, eff.depth, eff.levels);
      else if (check_which == "B")
        v = koethe::check_B(cfg.family, eff.depth, eff.levels);
      else if (check_which == "M")
        v = koethe::check_M(cfg.family, std::nullopt, eff.depth, eff.levels);
      else
        v = koethe::check_log_criterion(cfg.family, eff.depth, eff.levels);
      std::cout << dump({{"name", cfg.name},
                         {"condition", check_which},
                         {"verdict", verdict_json(v)}});
      return 0;
    }

    if (*cmd_witness) {
      koethe::SpaceConfig cfg = koethe::load_space_config(witness_path);
      Effective eff = effective(cfg);
      if (witness_kind == "non-algebra") {
        koethe::NonAlgebraWitness w = koethe::non_algebra_witness(
            cfg.family, witness_kmax, 200000000ULL, witness_force);
        json idx_head = json::array();
        for (std::size_t t = 0; t < std::min<std::size_t>(w.indices.size(), 32); ++t)
          idx_head.push_back(w.indices[t]);
        std::cout << dump({{"name", cfg.name},
                           {"kind", "non-algebra"},
                           {"failing_level", w.failing_level},
                           {"spikes", w.indices.size()},
                           {"indices_head", idx_head},
                           {"square_partial_log", w.square_partial.log_d()},
                           {"level_partials_log", log_array(w.level_partials)},
                           {"x_support", w.x.support().size()}});
      } else {
        koethe::IdempotenceReport battery = koethe::idempotence_profile(
            cfg.family, eff.depth, eff.levels, env_seed());
        koethe::NonIdempotentWitness w =
            koethe::non_idempotent_witness(cfg.family, eff.depth, eff.levels);
        json fr = json::array();
        for (long double p : w.fourth_root_partials)
          fr.push_back(static_cast<double>(p));
        std::cout << dump({{"name", cfg.name},
                           {"kind", "non-idempotent"},
                           {"battery", battery.to_json()},
                           {"block_ends", w.block_ends},
                           {"fourth_root_partials", fr},
                           {"level_partials_log", log_array(w.level_partials)},
                           {"level_tail_bounds_log", log_array(w.level_tail_bounds)},
                           {"support_size", w.a.support().size()}});
      }
      return 0;
    }

    if (*cmd_approx) {
      koethe::SpaceConfig cfg = koethe::load_space_config(approx_path);
      Effective eff = effective(cfg);
      if (approx_nfrom == 0 || approx_nto < approx_nfrom)
        throw koethe::ConfigError("need 1 <= n-from <= n-to");
      if (approx_nto - approx_nfrom > 2000)
        throw koethe::ConfigError("step range too large (over 2000 steps)");
      koethe::SeqElement a = koethe::SeqElement::from_abs_expr(
          koethe::dsl::parse(approx_element), cfg.family.index_set(), eff.depth, true);
      std::optional<std::uint64_t> qo;
      if (approx_q != 0) qo = approx_q;
      std::vector<koethe::ApproxIdentityStep> steps;
      for (std::uint64_t n = approx_nfrom; n <= approx_nto; ++n)
        steps.push_back(
            koethe::build_un(a, cfg.family, approx_plevel, n, eff.depth, qo));
      koethe::ConvergenceReport rep = koethe::verify_convergence(
          a, cfg.family, approx_plevel, steps, eff.epsilon);
      if (opt_format == "csv") {
        std::cout << rep.to_csv();
      } else {
        koethe::LawsonReadReport lr =
            koethe::verify_lawson_read({a}, cfg.family, steps, eff.depth);
        std::cout << dump({{"name", cfg.name},
                           {"element", approx_element},
                           {"convergence", rep.to_json()},
                           {"multiplier_battery", lr.to_json()}});
      }
      return 0;
    }

    if (*cmd_had) {
      if (had_N == 0) throw koethe::ConfigError("--N must be positive");
      koethe::CoeffSeq f = seq_from_spec(had_f, had_N);
      koethe::CoeffSeq g = seq_from_spec(had_g, had_N);
      koethe::CoeffSeq p = koethe::hadamard_mul(f, g, had_N);
      if (opt_format == "csv") {
        std::string out = "n,f_re,f_im,g_re,g_im,prod_re,prod_im\n";
        char buf[160];
        for (std::size_t n = 0; n < had_N; ++n) {
          std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", n,
                        f[n].real(), f[n].imag(), g[n].real(), g[n].imag(), p[n].real(),
                        p[n].imag());
          out += buf;
        }
        std::cout << out;
      } else {
        auto arr = [](const koethe::CoeffSeq& s) {
          json a = json::array();
          for (const auto& z : s) a.push_back({z.real(), z.imag()});
          return a;
        };
        std::cout << dump(
            {{"f", arr(f)}, {"g", arr(g)}, {"product", arr(p)}, {"N", had_N}});
      }
      return 0;
    }

    if (*cmd_report) {
      fs::path dir(report_dir);
      if (!fs::is_directory(dir))
        throw koethe::ConfigError("not a directory: " + report_dir);
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(dir)) {
        const std::string fn = e.path().filename().string();
        if (fn.size() > 13 && fn.substr(fn.size() - 13) == ".profile.json")
          files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      json rows = json::array();
      for (const fs::path& p : files) {
        std::ifstream in(p);
        json j;
        try {
          j = json::parse(in);
        } catch (const json::parse_error& ex) {
          throw koethe::ConfigError("malformed profile " + p.string() + ": " + ex.what());
        }
        rows.push_back(
            {{"name", j.value("name", p.stem().stem().string())},
             {"dg", j["profile"]["dg"]["value"]},
             {"db", j["profile"]["db"]["value"]},
             {"wdg", j["profile"]["wdg"]["value"]},
             {"wdb", j["profile"]["wdb"]["value"]},
             {"U", j["conditions"]["U"]["outcome"]},
             {"N", j["conditions"]["N"]["outcome"]},
             {"B", j["conditions"]["B"]["outcome"]},
             {"M", j["conditions"]["M"]["outcome"]},
             {"consistent", j["consistency"].empty()}});
      }
      if (opt_format == "csv") {
        std::string out = "name,dg,db,wdg,wdb,U,N,B,M,consistent\n";
        for (const json& r : rows) {
          out += r["name"].get<std::string>() + "," + r["dg"].get<std::string>() + "," +
                 r["db"].get<std::string>() + "," + r["wdg"].get<std::string>() + "," +
                 r["wdb"].get<std::string>() + "," + r["U"].get<std::string>() + "," +
                 r["N"].get<std::string>() + "," + r["B"].get<std::string>() + "," +
                 r["M"].get<std::string>() + "," +
                 (r["consistent"].get<bool>() ? "yes" : "no") + "\n";
        }
        std::cout << out;
      } else {
        std::cout << dump({{"profiles", rows}, {"count", rows.size()}});
      }
      return 0;
    }

    return 0;
  } catch (const koethe::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const koethe::PreconditionError& e) {
    std::cerr << "hypothesis not met: " << e.what() << "\n";
    return 2;
  } catch (const koethe::InternalError& e) {
    std::cerr << "internal fault: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal fault: " << e.what() << "\n";
    return 3;
  }
}
