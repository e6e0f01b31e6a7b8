#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "varilet/error.hpp"
#include "varilet/field.hpp"
#include "varilet/lens.hpp"
#include "varilet/mlf.hpp"
#include "varilet/plot.hpp"
#include "varilet/transform.hpp"
#include "varilet/ttv.hpp"
#include "varilet/verify.hpp"

using namespace varilet;
namespace fs = std::filesystem;

namespace {

enum Exit { ok = 0, verification_failed = 1, parse_failed = 2, lens_failed = 3, coefficient_failed = 4 };

struct Config {
  std::string input;
  std::string lens;
  std::string coeffs;
  std::string output;
  std::string plot;
  std::vector<std::string> cuts;
  bool branch = false;
  double min_amplitude = 0.0;
  int trials = 100;
  std::uint64_t seed = 1;
  bool no_self_check = false;
  bool refined = false;
  std::string fault;
  bool fuzz = false;
  int fields = 50;
  int max_vertices = 200;
  std::size_t threads = 1;
};

std::string g12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Writes next to the target and renames, so readers never see a partial file.
void write_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cannot write " + path);
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw ParseError("cannot write " + path);
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw ParseError("cannot write " + path + ": " + ec.message());
  }
}

void emit(const Config& cfg, const std::string& content) {
  if (cfg.output.empty()) {
    std::cout << content;
  } else {
    write_atomic(cfg.output, content);
  }
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path);
  try {
    nlohmann::json doc;
    in >> doc;
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

bool is_basis_document(const std::string& path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) return false;
  const nlohmann::json doc = read_json(path);
  return doc.is_object() && doc.value("format", "") == "varilet.basis";
}

// level:direction:vertex, e.g. 1.0:up:3. The vertex is a domain vertex id.
ThresholdCut parse_cut(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  if (parts.size() != 3) throw ParseError("cut '" + text + "' is not level:up|down:vertex");
  ThresholdCut cut;
  try {
    std::size_t used = 0;
    cut.level = std::stod(parts[0], &used);
    if (used != parts[0].size() || !std::isfinite(cut.level)) throw std::invalid_argument("level");
    cut.seed = {Seed::Kind::domain_vertex, std::stoll(parts[2], &used), 0.0};
    if (used != parts[2].size()) throw std::invalid_argument("vertex");
  } catch (const std::logic_error&) {
    throw ParseError("cut '" + text + "' is not level:up|down:vertex");
  }
  if (parts[1] == "up") {
    cut.direction = Direction::up;
  } else if (parts[1] == "down") {
    cut.direction = Direction::down;
  } else {
    throw ParseError("cut direction must be up or down, got '" + parts[1] + "'");
  }
  return cut;
}

Lens lens_for(const Config& cfg, const Factorization& fact) {
  if (!cfg.lens.empty()) {
    if (cfg.branch || !cfg.cuts.empty()) throw ParseError("--lens cannot be combined with --branch or --cut");
    const auto specs = lens_specs_from_json(read_json(cfg.lens));
    return realize_lens(fact, specs);
  }
  if (cfg.branch) {
    if (!cfg.cuts.empty()) throw ParseError("--branch cannot be combined with --cut");
    return build_branch_lens(fact, cfg.min_amplitude);
  }
  std::vector<ThresholdCut> cuts;
  for (const auto& c : cfg.cuts) cuts.push_back(parse_cut(c));
  return build_threshold_lens(fact, cuts);
}

// Accepts a CSV file of index,value rows (unlisted indices are 0) or an
// inline list such as "2,0" or "2 0".
std::vector<double> parse_coeffs(const std::string& source, std::size_t n) {
  auto number = [](const std::string& s, const std::string& where) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw CoefficientError(where + ": not a number: '" + s + "'");
    if (!std::isfinite(v)) throw CoefficientError(where + ": non-finite coefficient");
    return v;
  };
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return std::string{};
    return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
  };

  if (fs::is_regular_file(source)) {
    std::ifstream in(source);
    if (!in) throw CoefficientError("cannot read " + source);
    std::vector<double> out(n, 0.0);
    std::vector<bool> seen(n, false);
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
      ++line_no;
      line = trim(line);
      if (line.empty()) continue;
      const auto comma = line.find(',');
      const std::string where = source + ":" + std::to_string(line_no);
      if (comma == std::string::npos) throw CoefficientError(where + ": expected index,value");
      const std::string idx_text = trim(line.substr(0, comma));
      const std::string val_text = trim(line.substr(comma + 1));
      const bool numeric = !idx_text.empty() && idx_text.find_first_not_of("0123456789") == std::string::npos;
      if (first && !numeric) {
        first = false;
        continue;  // header
      }
      first = false;
      if (!numeric) throw CoefficientError(where + ": bad index '" + idx_text + "'");
      const std::size_t idx = std::stoull(idx_text);
      if (idx >= n) {
        throw CoefficientError(where + ": index " + idx_text + " out of range for " + std::to_string(n) +
                               " varilets");
      }
      if (seen[idx]) throw CoefficientError(where + ": index " + idx_text + " given twice");
      seen[idx] = true;
      out[idx] = number(val_text, where);
    }
    return out;
  }

  std::vector<double> out;
  std::string token;
  for (char c : source + ",") {
    if (c == ',' || c == ' ' || c == '\t' || c == ';') {
      if (!token.empty()) out.push_back(number(token, "coefficients"));
      token.clear();
    } else {
      token += c;
    }
  }
  if (out.size() != n) {
    throw CoefficientError("got " + std::to_string(out.size()) + " coefficients for " + std::to_string(n) +
                           " varilets");
  }
  return out;
}

std::string dump(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

int cmd_ttv(const Config& cfg) {
  const ScalarField f = read_field_file(cfg.input);
  std::cout << g12(ttv(f)) << "\n";
  return ok;
}

int cmd_lens_build(const Config& cfg) {
  const ScalarField f = read_field_file(cfg.input);
  const Factorization fact = factorize(f);
  const Lens lens = lens_for(cfg, fact);
  emit(cfg, dump(lens_to_json(lens)));
  return ok;
}

int cmd_transform(const Config& cfg) {
  const ScalarField f = read_field_file(cfg.input);
  auto fact = std::make_shared<const Factorization>(factorize(f));
  const Lens lens = lens_for(cfg, *fact);
  const VariletBasis basis = varilet_transform(fact, lens);

  const double total = ttv(fact->middle);
  double sum = 0.0;
  std::cout << "index  amplitude\n";
  for (std::size_t i = 0; i < basis.size(); ++i) {
    std::cout << i << "  " << g12(basis.amplitudes[i]) << "\n";
    sum += basis.amplitudes[i];
  }
  std::cout << "sum  " << g12(sum) << "\nttv  " << g12(total) << "\n";
  if (std::abs(sum - total) > 1e-12 * std::max(1.0, std::abs(total))) {
    std::cerr << "error: amplitudes add up to " << g12(sum) << " but ttv is " << g12(total) << "\n";
    return verification_failed;
  }
  if (!cfg.output.empty()) write_atomic(cfg.output, dump(basis_to_json(basis)));
  if (!cfg.plot.empty()) write_atomic(cfg.plot, basis_svg(basis));
  return ok;
}

int cmd_filter(const Config& cfg) {
  const nlohmann::json doc = read_json(cfg.input);
  const VariletBasis basis = basis_from_json(doc);
  const std::vector<double> coeffs = parse_coeffs(cfg.coeffs, basis.size());
  const ScalarField out = filter(basis, coeffs, FilterOptions{!cfg.no_self_check});
  const ScalarField canonical = cfg.refined ? out : coarsen(out);
  emit(cfg, dump(field_to_json(canonical)));
  if (!cfg.plot.empty()) write_atomic(cfg.plot, field_svg(canonical));
  return ok;
}

int cmd_verify(const Config& cfg) {
  VerificationReport report;
  if (cfg.fuzz) {
    FuzzOptions opt;
    opt.seed = cfg.seed;
    opt.fields = cfg.fields;
    opt.max_vertices = cfg.max_vertices;
    opt.trials = cfg.trials;
    opt.threads = cfg.threads;
    report = fuzz(opt);
  } else {
    const ScalarField f = read_field_file(cfg.input);
    auto fact = std::make_shared<const Factorization>(factorize(f));
    const Lens lens = lens_for(cfg, *fact);
    report.merge(verify_factorization(*fact), "factorization/");
    const VerificationReport lens_report = validate_lens(fact, lens);
    if (!lens_report.ok()) {
      report.merge(lens_report, "lens/");
    } else {
      Prepared prep = prepare(fact, lens);
      if (!cfg.fault.empty()) {
        const Fault fault = fault_from_string(cfg.fault);
        if (!inject_fault(prep, fault)) {
          std::cerr << "error: fault " << cfg.fault << " has no place to go in this basis\n";
          return verification_failed;
        }
        std::cerr << "note: injected fault " << cfg.fault << "\n";
      }
      report.merge(check_lemmas(prep, cfg.seed));
      report.merge(check_basis(prep, cfg.trials, cfg.seed));
    }
  }
  std::cout << report.to_table();
  if (!cfg.output.empty()) write_atomic(cfg.output, dump(report.to_json()));
  return report.ok() ? ok : verification_failed;
}

int cmd_plot(const Config& cfg) {
  std::string svg;
  if (is_basis_document(cfg.input)) {
    svg = basis_svg(basis_from_json(read_json(cfg.input)));
  } else {
    svg = field_svg(read_field_file(cfg.input));
  }
  if (cfg.output.empty()) throw ParseError("plot needs --output");
  write_atomic(cfg.output, svg);
  return ok;
}

int run(const std::string& name, const Config& cfg) {
  try {
    if (name == "ttv") return cmd_ttv(cfg);
    if (name == "transform") return cmd_transform(cfg);
    if (name == "filter") return cmd_filter(cfg);
    if (name == "verify") return cmd_verify(cfg);
    if (name == "lens-build") return cmd_lens_build(cfg);
    if (name == "plot") return cmd_plot(cfg);
  } catch (const LensError& e) {
    std::cerr << "lens error: " << e.what() << "\n";
    return lens_failed;
  } catch (const CoefficientError& e) {
    std::cerr << "coefficient error: " << e.what() << "\n";
    return coefficient_failed;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return parse_failed;
  } catch (const DegenerateFieldError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return parse_failed;
  } catch (const ConsistencyError& e) {
    std::cerr << "verification error: " << e.what() << "\n";
    return verification_failed;
  }
  return parse_failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"varilet: topological total variation and varilet transforms of PL fields on graphs"};
  app.require_subcommand(1);
  Config cfg;

  auto input = [&](CLI::App* sub, const std::string& what) {
    sub->add_option("--input,-i", cfg.input, what)->required()->check(CLI::ExistingFile);
  };
  auto lens_options = [&](CLI::App* sub) {
    sub->add_option("--lens", cfg.lens, "lens document")->check(CLI::ExistingFile);
    sub->add_option("--cut", cfg.cuts, "threshold cut level:up|down:vertex (repeatable)");
    sub->add_flag("--branch", cfg.branch, "build the branch lens");
    sub->add_option("--min-amplitude", cfg.min_amplitude, "smallest branch persistence kept");
  };

  auto* ttv_cmd = app.add_subcommand("ttv", "print the topological total variation");
  input(ttv_cmd, "field (.csv series or JSON graph)");

  auto* transform_cmd = app.add_subcommand("transform", "varilet transform; prints amplitudes");
  input(transform_cmd, "field (.csv series or JSON graph)");
  lens_options(transform_cmd);
  transform_cmd->add_option("--output,-o", cfg.output, "basis document");
  transform_cmd->add_option("--plot", cfg.plot, "SVG with one panel per varilet");

  auto* filter_cmd = app.add_subcommand("filter", "weighted varilet sum of a basis document");
  input(filter_cmd, "basis document");
  filter_cmd->add_option("--coeffs,-c", cfg.coeffs, "CSV file of index,value or inline list")->required();
  filter_cmd->add_option("--output,-o", cfg.output, "filtered field document (stdout if absent)");
  filter_cmd->add_flag("--no-self-check", cfg.no_self_check, "skip the varilet-sum cross check");
  filter_cmd->add_flag("--refined", cfg.refined, "keep the vertices inserted at support boundaries");
  filter_cmd->add_option("--plot", cfg.plot, "SVG of the filtered field");

  auto* verify_cmd = app.add_subcommand("verify", "run the verification suite");
  verify_cmd->add_option("--input,-i", cfg.input, "field (.csv series or JSON graph)")->check(CLI::ExistingFile);
  lens_options(verify_cmd);
  verify_cmd->add_option("--trials", cfg.trials, "random coefficient vectors")->check(CLI::NonNegativeNumber);
  verify_cmd->add_option("--seed", cfg.seed, "random seed");
  verify_cmd->add_option("--inject-fault", cfg.fault,
                         "plant a fault: gamma_breakpoint, amplitude, boundary_value, link_node, flat_value, "
                         "varilet_value");
  verify_cmd->add_flag("--fuzz", cfg.fuzz, "random fields and lenses instead of --input");
  verify_cmd->add_option("--fields", cfg.fields, "fuzz: number of fields")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--max-vertices", cfg.max_vertices, "fuzz: largest field")->check(CLI::Range(2, 1000000));
  verify_cmd->add_option("--threads", cfg.threads, "fuzz: worker threads")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--output,-o", cfg.output, "report document");

  auto* lens_cmd = app.add_subcommand("lens-build", "build a lens document");
  input(lens_cmd, "field (.csv series or JSON graph)");
  lens_options(lens_cmd);
  lens_cmd->add_option("--output,-o", cfg.output, "lens document (stdout if absent)");

  auto* plot_cmd = app.add_subcommand("plot", "render a field or basis document as SVG");
  input(plot_cmd, "field or basis document");
  plot_cmd->add_option("--output,-o", cfg.output, "SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Error& e) {
    app.exit(e);
    return parse_failed;
  }
  if (verify_cmd->parsed() && !cfg.fuzz && cfg.input.empty()) {
    std::cerr << "verify needs --input or --fuzz\n";
    return parse_failed;
  }
  return run(app.get_subcommands().front()->get_name(), cfg);
}
