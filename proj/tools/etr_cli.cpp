// etr: generate, render, predict, judge, eval, analyze, conformance.
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "etr/analytics.hpp"
#include "etr/conformance.hpp"
#include "etr/harness.hpp"

namespace fs = std::filesystem;
using namespace etr;

namespace {

const std::map<std::string, JudgeMode> judge_modes = {
    {"endorsement", JudgeMode::endorsement}, {"exact", JudgeMode::exact}, {"equivalence", JudgeMode::equivalence}};

std::vector<Theme> themes_from(const std::string& dir) { return dir.empty() ? builtin_themes() : load_theme_dir(dir); }

const Problem& find_problem(const std::vector<Problem>& ps, const std::string& id) {
  for (const auto& p : ps)
    if (p.id == id) return p;
  throw std::runtime_error("no problem with id " + id);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

struct GenerateArgs {
  std::size_t n = 400;
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out = "-";
};

int run_generate(const GenerateArgs& a) {
  GenConfig cfg = a.config.empty() ? GenConfig{} : GenConfig::from_key_values(read_key_values(a.config));
  if (a.seed) cfg.seed = *a.seed;
  cfg.validate();
  const auto problems = generate_problems(cfg, a.n);
  std::size_t bad = 0;
  for (const auto& p : problems) {
    const auto report = validate_problem(p, cfg);
    for (const auto& v : report.violations) std::cerr << p.id << ": " << v << "\n";
    bad += !report.ok();
  }
  if (a.out == "-") {
    write_problems(std::cout, problems);
  } else {
    std::ofstream out(a.out);
    if (!out) throw std::runtime_error("cannot write " + a.out);
    write_problems(out, problems);
  }
  std::cerr << "generated " << problems.size() << " problems (seed " << cfg.seed << "), " << bad
            << " failed validation\n";
  return bad ? 1 : 0;
}

struct RenderArgs {
  std::string problems;
  std::string id;
  std::string themes;
  bool reversed = false;
  bool no_either = false;
};

int run_render(const RenderArgs& a) {
  const auto problems = read_problems(a.problems);
  const auto themes = themes_from(a.themes);
  const RenderOptions opt{!a.no_either};
  auto prompt_of = [&](const Problem& p, ThemeMapping& m) {
    const Problem shown = a.reversed ? reverse_premises(p) : p;
    m = assign_theme(p, themes);
    return render_prompt(shown.premises, m, opt);
  };
  if (!a.id.empty()) {
    ThemeMapping m;
    std::cout << prompt_of(find_problem(problems, a.id), m) << "\n";
    return 0;
  }
  for (const auto& p : problems) {
    ThemeMapping m;
    const std::string prompt = prompt_of(p, m);
    nlohmann::json j = {{"id", p.id},
                        {"order", a.reversed ? "reversed" : "original"},
                        {"theme", m.theme.name},
                        {"mapping_seed", m.rng_seed},
                        {"prompt_hash", prompt_hash(prompt)},
                        {"prompt", prompt}};
    std::cout << j.dump() << "\n";
  }
  return 0;
}

struct PredictArgs {
  std::vector<std::string> premises;
  std::string file;
  bool no_trace = false;
};

int run_predict(const PredictArgs& a) {
  std::vector<View> views;
  for (const auto& s : a.premises) views.push_back(parse_view(s));
  if (!a.file.empty()) {
    std::ifstream in(a.file);
    if (!in) throw std::runtime_error("cannot open " + a.file);
    for (std::string line; std::getline(in, line);)
      if (!trim(line).empty() && trim(line)[0] != '#') views.push_back(parse_view(line));
  }
  if (views.empty()) throw CLI::ValidationError("predict", "no premises given");
  InferenceTrace trace;
  const View v = what_follows(views, &trace);
  std::cout << print_view(v) << "\n";
  if (!a.no_trace) std::cout << format_trace(trace);
  return 0;
}

struct JudgeArgs {
  std::string problems;
  std::string id;
  std::string answer;
  std::string answer_file;
  std::string themes;
  std::string mode = "endorsement";
  bool reversed = false;
};

int run_judge(const JudgeArgs& a) {
  const auto problems = read_problems(a.problems);
  const Problem& p = find_problem(problems, a.id);
  const ThemeMapping m = assign_theme(p, themes_from(a.themes));
  const std::string text = a.answer_file.empty() ? a.answer : read_text(a.answer_file);
  const ParsedAnswer ans = parse_answer(text, m);
  nlohmann::json j = {{"id", p.id}, {"order", a.reversed ? "reversed" : "original"}, {"answer", to_string(ans.status)}};
  if (ans.status == AnswerStatus::parse_error) {
    j["error"] = ans.error;
    std::cout << j.dump(2) << "\n";
    return 1;
  }
  if (ans.conclusion) j["conclusion"] = print_view(*ans.conclusion);
  const Problem shown = a.reversed ? reverse_premises(p) : p;
  const Verdict v = judge_response(shown, ans, judge_modes.at(a.mode));
  j["verdict"] = {{"logically_correct", v.logically_correct},
                  {"etr_predicted", v.etr_predicted},
                  {"human_like_fallacy", v.human_like_fallacy},
                  {"mode", to_string(v.mode)}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

struct EvalArgs {
  std::string config;
  std::string problems;
  std::string store;
  std::string themes;
  std::string mode = "endorsement";
  std::size_t in_flight = 8;
  std::size_t limit = 0;
  bool no_reversed = false;
};

int run_eval(const EvalArgs& a) {
  const EvalConfig ec = parse_eval_config(read_key_values(a.config));
  auto problems = read_problems(a.problems);
  if (a.limit && a.limit < problems.size()) problems.resize(a.limit);
  SuiteConfig cfg;
  cfg.store_path = a.store;
  cfg.in_flight = a.in_flight;
  cfg.mode = judge_modes.at(a.mode);
  cfg.reversed = !a.no_reversed;
  cfg.themes = themes_from(a.themes);
  std::shared_ptr<ChatClient> shared = HttpChatClient::from_env(ec.base_url, ec.api_key_env);
  if (!ec.translator.empty()) {
    cfg.translator = shared;
    cfg.translation.model = ec.translator;
  }
  const auto summary = run_suite(ec.models, problems, cfg, [&](const ModelSpec&) { return shared; });
  std::cout << "sent " << summary.sent << ", skipped " << summary.skipped << ", transport errors "
            << summary.transport_errors << ", parse errors " << summary.parse_errors << "\n";
  return 0;
}

struct AnalyzeArgs {
  std::string store;
  std::string problems;
  std::string themes;
  std::string capabilities;
  std::string metric = "elo";
  std::string out = "report";
  double threshold = 0.2;
  bool one_sided = false;
};

int run_analyze(const AnalyzeArgs& a) {
  const auto records = read_run_records(a.store);
  if (records.empty()) throw std::runtime_error("no records in " + a.store);
  fs::create_directories(a.out);

  std::vector<std::string> drift;
  if (!a.problems.empty()) {
    drift = prompt_hash_mismatches(records, read_problems(a.problems), themes_from(a.themes));
    for (const auto& k : drift) std::cerr << "prompt hash mismatch: " << k << "\n";
  }

  const ExclusionManifest manifest = exclusion_report(records, a.threshold);
  const auto kept = analyzable(records, manifest);
  const auto stats = model_stats(kept);
  const auto reversal = reversal_effect(kept, !a.one_sided);

  std::vector<CorrelationReport> correlations;
  if (!a.capabilities.empty()) {
    const CapabilityTable table = CapabilityTable::load(a.capabilities);
    try {
      correlations.push_back(correlate_fallacy_rate(stats, table, a.metric));
      write_text(fs::path(a.out) / ("fallacy_rate_vs_" + a.metric + ".svg"),
                 scatter_svg(correlations.back(), "Fallacy rate vs " + a.metric));
    } catch (const StatsError& e) {
      std::cerr << "correlation skipped: " << e.what() << "\n";
    }
  }

  std::ostringstream csv;
  write_summary_csv(csv, stats, reversal);
  write_text(fs::path(a.out) / "summary.csv", csv.str());
  nlohmann::json results = results_json(stats, reversal, manifest, correlations);
  results["prompt_hash_mismatches"] = drift;
  results["two_sided"] = !a.one_sided;
  write_text(fs::path(a.out) / "results.json", results.dump(2) + "\n");
  write_text(fs::path(a.out) / "exclusions.json", to_json(manifest).dump(2) + "\n");
  std::cout << csv.str();
  return 0;
}

int run_conformance_cmd() {
  bool ok = true;
  for (const auto& r : run_conformance()) {
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << (r.extended ? " (extended)" : "") << ": " << r.detail
              << "\n";
    if (!r.pass && !r.extended) ok = false;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reasoning-fallacy benchmark toolkit"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate and validate problems");
  g->add_option("--n", gen.n, "Number of problems")->check(CLI::PositiveNumber);
  g->add_option("--seed", gen.seed, "Generator seed");
  g->add_option("--config", gen.config, "Generator key = value file")->check(CLI::ExistingFile);
  g->add_option("--out", gen.out, "Output file, '-' for stdout");

  RenderArgs ren;
  auto* r = app.add_subcommand("render", "Render prompts");
  r->add_option("--problems", ren.problems)->required()->check(CLI::ExistingFile);
  r->add_option("--id", ren.id, "Print the raw prompt of one problem");
  r->add_option("--themes", ren.themes, "Theme directory")->check(CLI::ExistingDirectory);
  r->add_flag("--reversed", ren.reversed, "Reverse premise order");
  r->add_flag("--no-either", ren.no_either, "Omit 'either' before two alternatives");

  PredictArgs pred;
  auto* p = app.add_subcommand("predict", "Run the inference procedure on premises in view notation");
  p->add_option("premises", pred.premises, "Premises in order");
  p->add_option("--file", pred.file, "One premise per line")->check(CLI::ExistingFile);
  p->add_flag("--no-trace", pred.no_trace, "Print only the conclusion");

  JudgeArgs jud;
  auto* j = app.add_subcommand("judge", "Judge one answer");
  j->add_option("--problems", jud.problems)->required()->check(CLI::ExistingFile);
  j->add_option("--id", jud.id)->required();
  auto* ans = j->add_option("--answer", jud.answer, "Answer text");
  j->add_option("--answer-file", jud.answer_file)->check(CLI::ExistingFile)->excludes(ans);
  j->add_option("--themes", jud.themes)->check(CLI::ExistingDirectory);
  j->add_option("--mode", jud.mode)->check(CLI::IsMember({"endorsement", "exact", "equivalence"}));
  j->add_flag("--reversed", jud.reversed);

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Query models and record judged responses");
  e->add_option("--config", ev.config, "Endpoint and model list")->required()->check(CLI::ExistingFile);
  e->add_option("--problems", ev.problems)->required()->check(CLI::ExistingFile);
  e->add_option("--store", ev.store, "Run store (JSON lines, resumable)")->required();
  e->add_option("--themes", ev.themes)->check(CLI::ExistingDirectory);
  e->add_option("--mode", ev.mode)->check(CLI::IsMember({"endorsement", "exact", "equivalence"}));
  e->add_option("--in-flight", ev.in_flight)->check(CLI::PositiveNumber);
  e->add_option("--limit", ev.limit, "Use only the first N problems");
  e->add_flag("--no-reversed", ev.no_reversed, "Skip the reversed order");

  AnalyzeArgs an;
  auto* a = app.add_subcommand("analyze", "Aggregate a run store into reports");
  a->add_option("--store", an.store)->required()->check(CLI::ExistingFile);
  a->add_option("--problems", an.problems, "Problem file for the prompt-hash check")->check(CLI::ExistingFile);
  a->add_option("--themes", an.themes)->check(CLI::ExistingDirectory);
  a->add_option("--capabilities", an.capabilities, "model_id,metric,value table")->check(CLI::ExistingFile);
  a->add_option("--metric", an.metric);
  a->add_option("--out", an.out, "Report directory");
  a->add_option("--threshold", an.threshold, "Parse-error exclusion threshold")->check(CLI::Range(0.0, 1.0));
  a->add_flag("--one-sided", an.one_sided, "One-sided reversal z-test");

  app.add_subcommand("conformance", "Check the gold vectors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 2;
  }

  try {
    if (g->parsed()) return run_generate(gen);
    if (r->parsed()) return run_render(ren);
    if (p->parsed()) return run_predict(pred);
    if (j->parsed()) return run_judge(jud);
    if (e->parsed()) return run_eval(ev);
    if (a->parsed()) return run_analyze(an);
    return run_conformance_cmd();
  } catch (const CLI::ValidationError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}
