#include "srw/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "json_util.hpp"
#include "srw/agents.hpp"
#include "srw/config.hpp"
#include "srw/evaluation.hpp"
#include "srw/glue.hpp"
#include "srw/inference.hpp"
#include "srw/service.hpp"

namespace srw {

using detail::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  out << content;
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

double parse_double(const std::string& s, const std::string& flag) {
  std::size_t used = 0;
  double d = 0;
  try {
    d = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw UsageError(flag + ": '" + s + "' is not a number");
  return d;
}

EvidenceSet parse_evidence_flags(const std::vector<std::string>& hard, const std::vector<std::string>& soft) {
  EvidenceSet ev;
  for (const auto& h : hard) {
    auto eq = h.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--evidence expects node=1|0, got '" + h + "'");
    const auto node = h.substr(0, eq);
    const auto value = h.substr(eq + 1);
    if (value != "1" && value != "0") throw UsageError("--evidence expects node=1|0, got '" + h + "'");
    if (ev.has_finding(node)) throw UsageError("more than one finding for '" + node + "'");
    ev.set_hard(node, value == "1" ? State::Implied : State::NotImplied, "cli");
  }
  for (const auto& s : soft) {
    auto eq = s.find('=');
    auto comma = s.find(',', eq == std::string::npos ? 0 : eq);
    if (eq == std::string::npos || eq == 0 || comma == std::string::npos) {
      throw UsageError("--soft expects node=l_implied,l_not, got '" + s + "'");
    }
    const auto node = s.substr(0, eq);
    if (ev.has_finding(node)) throw UsageError("more than one finding for '" + node + "'");
    Likelihood lik{parse_double(s.substr(eq + 1, comma - eq - 1), "--soft"), parse_double(s.substr(comma + 1), "--soft")};
    ev.set_soft(node, lik, "cli");
  }
  return ev;
}

std::vector<std::string> read_utterances(const std::string& path) {
  std::istringstream in(slurp(path));
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos || line[b] == '#') continue;
    out.push_back(line.substr(b));
  }
  return out;
}

std::string belief_table(const std::vector<RankedBelief>& rows, std::string_view indent = "") {
  std::size_t width = 4;
  for (const auto& r : rows) width = std::max(width, r.node.size());
  std::string out;
  for (const auto& r : rows) {
    out += indent;
    out += r.node;
    out.append(width - r.node.size() + 2, ' ');
    out += fixed4(r.belief);
    out += '\n';
  }
  return out;
}

json ranked_json(const std::vector<RankedBelief>& rows) {
  json out = json::array();
  for (const auto& r : rows) out.push_back({{"node", r.node}, {"belief", r.belief}});
  return out;
}

json implied_json(const ImpliedSet& set, Mode mode) {
  return json{{"threshold", set.threshold},
              {"mode", to_string(mode)},
              {"implied", ranked_json(set.implied)},
              {"borderline", ranked_json(set.borderline)}};
}

std::string implied_text(const ImpliedSet& set, Mode mode) {
  std::string out = "threshold " + fixed4(set.threshold) + " (" + std::string(to_string(mode)) + ")\n";
  out += "implied:\n";
  out += set.implied.empty() ? "  (none)\n" : belief_table(set.implied, "  ");
  out += "borderline (band " + fixed4(set.band) + "):\n";
  out += set.borderline.empty() ? "  (none)\n" : belief_table(set.borderline, "  ");
  return out;
}

}  // namespace

Fragment load_network_source(const std::string& path) {
  const auto bytes = slurp(path);
  bool is_manifest = false;
  try {
    auto doc = json::parse(bytes);
    is_manifest = doc.is_object() && doc.contains("fragments");
  } catch (const json::parse_error&) {
    // let parse_fragment produce the located error
  }
  if (is_manifest) {
    auto dir = std::filesystem::path(path).parent_path();
    return glue_manifest(parse_glue_manifest(bytes, dir.empty() ? "." : dir.string())).first;
  }
  try {
    return parse_fragment(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.detail());
  }
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"System requirement web engine: Bayesian flowdown of user requirements", "srw"};
  app.require_subcommand(1);

  std::string output_format = "table";
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--output-format", output_format, "json or table")->check(CLI::IsMember({"json", "table"}));
  };

  // validate
  std::vector<std::string> validate_files;
  auto* validate = app.add_subcommand("validate", "Check fragment files or glue manifests");
  validate->add_option("files", validate_files, "Fragment or manifest files")->required();

  // glue
  std::string glue_manifest_path, glue_out, glue_report;
  auto* glue = app.add_subcommand("glue", "Glue the fragments listed in a manifest");
  glue->add_option("manifest", glue_manifest_path, "Glue manifest")->required();
  glue->add_option("-o,--output", glue_out, "Output fragment file")->required();
  glue->add_option("--report", glue_report, "Glue report file (default: <output>.report.json)");

  // infer / classify share the evidence flags
  std::string net_path;
  std::vector<std::string> evidence_flags, soft_flags;
  std::optional<double> threshold;
  std::string mode_name = "strict";
  double band = kDefaultBorderlineBand;
  auto add_evidence = [&](CLI::App* sub) {
    sub->add_option("network", net_path, "Fragment file or glue manifest")->required();
    sub->add_option("--evidence", evidence_flags, "Hard finding node=1|0 (repeatable)");
    sub->add_option("--soft", soft_flags, "Soft finding node=l_implied,l_not (repeatable)");
  };
  auto add_threshold = [&](CLI::App* sub) {
    sub->add_option("--threshold", threshold, "Implication threshold (overrides --mode)")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--mode", mode_name, "strict (0.75) or expert (0.5)")->check(CLI::IsMember({"strict", "expert"}));
    sub->add_option("--band", band, "Borderline band below the threshold")->check(CLI::Range(0.0, 1.0));
  };
  auto* infer = app.add_subcommand("infer", "Posterior beliefs under evidence");
  add_evidence(infer);
  add_format(infer);
  auto* classify_cmd = app.add_subcommand("classify", "Implied requirements under evidence");
  add_evidence(classify_cmd);
  add_threshold(classify_cmd);
  add_format(classify_cmd);

  // session
  std::string agents_dir, rules_path, utterances_path, transcript_path;
  int max_rounds = 50;
  bool batch = false;
  auto* session_cmd = app.add_subcommand("session", "Run a headless elicitation session");
  session_cmd->add_option("network", net_path, "Fragment file or glue manifest")->required();
  session_cmd->add_option("--agents", agents_dir, "Directory of agent files")->required();
  session_cmd->add_option("--rules", rules_path, "Pattern rulebook")->required();
  session_cmd->add_option("--utterances", utterances_path, "User requirements, one per line")->required();
  session_cmd->add_option("--max-rounds", max_rounds, "Agent rounds per settle")->check(CLI::PositiveNumber);
  session_cmd->add_flag("--batch-propagate", batch, "Propagate once per round");
  session_cmd->add_option("--transcript", transcript_path, "Write the transcript (JSON lines) here");
  add_threshold(session_cmd);
  add_format(session_cmd);

  // score
  std::string implied_path, gold_path;
  auto* score_cmd = app.add_subcommand("score", "Accuracy and coverage against a gold standard");
  score_cmd->add_option("--implied", implied_path, "Implied ids (JSON or one per line)")->required();
  score_cmd->add_option("--gold", gold_path, "Gold standard file")->required();
  add_format(score_cmd);

  // serve
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string base_dir = ".";
  auto* serve_cmd = app.add_subcommand("serve", "Serve the session HTTP API");
  serve_cmd->add_option("--port", port, "TCP port")->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--base-dir", base_dir, "Directory relative paths resolve against");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  const Mode mode = *parse_mode(mode_name);
  const bool as_json = output_format == "json";

  try {
    if (*validate) {
      int status = kExitOk;
      for (const auto& f : validate_files) {
        try {
          Fragment frag = load_network_source(f);
          auto report = validate_network(compile(frag));
          if (!report.ok()) {
            for (const auto& v : report.violations)
              err << f << ": " << to_string(v.kind) << " at '" << v.node << "': " << v.detail << "\n";
            status = kExitDomainError;
            continue;
          }
          for (const auto& w : fragment_warnings(frag)) err << f << ": warning: " << w << "\n";
          out << "ok " << f << " (" << frag.nodes.size() << " nodes)\n";
        } catch (const Error& e) {
          err << "error: " << to_string(e.kind()) << ": " << e.detail() << "\n";
          status = kExitDomainError;
        }
      }
      return status;
    }

    if (*glue) {
      auto [frag, report] = glue_manifest(load_glue_manifest(glue_manifest_path));
      write_file(glue_out, serialize_fragment(frag));
      const auto report_path = glue_report.empty() ? glue_out + ".report.json" : glue_report;
      write_file(report_path, glue_report_json(report));
      for (const auto& w : report.warnings) err << "warning: " << w << "\n";
      out << "glued " << frag.nodes.size() << " nodes (" << report.unified.size() << " unified) into " << glue_out
          << "\n";
      return kExitOk;
    }

    if (*infer || *classify_cmd) {
      const EvidenceSet ev = parse_evidence_flags(evidence_flags, soft_flags);
      const auto beliefs = posterior_marginals(compile(load_network_source(net_path)), ev);
      if (*infer) {
        const auto rows = rank_beliefs(beliefs);
        if (as_json) {
          out << json{{"beliefs", ranked_json(rows)}}.dump(2) << "\n";
        } else {
          out << belief_table(rows);
        }
        return kExitOk;
      }
      const auto set = classify(beliefs, resolve_threshold(mode, threshold), band);
      out << (as_json ? implied_json(set, mode).dump(2) + "\n" : implied_text(set, mode));
      return kExitOk;
    }

    if (*session_cmd) {
      SessionConfig config;
      config.mode = mode;
      config.threshold = resolve_threshold(mode, threshold);
      config.borderline_band = band;
      config.max_rounds = max_rounds;
      config.batch_propagate = batch;
      config.on_conflict = OnConflict::Halt;
      const auto net = compile(load_network_source(net_path));
      const auto result = run_session(net, load_agents_dir(agents_dir), read_utterances(utterances_path),
                                      load_rulebook(rules_path), config);
      if (!transcript_path.empty()) write_file(transcript_path, transcript_to_jsonl(result.transcript));
      const std::string_view outcome = result.outcome == SessionOutcome::Conflict            ? "conflict"
                                       : result.outcome == SessionOutcome::MaxRoundsExceeded ? "max_rounds_exceeded"
                                                                                             : "completed";
      if (as_json) {
        auto j = implied_json(result.implied, mode);
        j["outcome"] = outcome;
        j["events"] = result.transcript.size();
        out << j.dump(2) << "\n";
      } else {
        out << "outcome: " << outcome << " (" << result.transcript.size() << " events)\n";
        out << implied_text(result.implied, mode);
      }
      if (result.outcome == SessionOutcome::Conflict) {
        err << "session halted: agents oscillate; resolution is left to the operator\n";
        return kExitConflict;
      }
      return result.outcome == SessionOutcome::MaxRoundsExceeded ? kExitDomainError : kExitOk;
    }

    if (*score_cmd) {
      const auto metrics = score(parse_implied_list(slurp(implied_path)), load_gold(gold_path));
      out << (as_json ? metrics_json(metrics) : metrics_table(metrics));
      return kExitOk;
    }

    if (*serve_cmd) {
      out << "serving on http://" << host << ":" << port << "\n" << std::flush;
      if (!serve(host, port, base_dir)) {
        err << "error: cannot listen on " << host << ":" << port << "\n";
        return kExitDomainError;
      }
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.detail() << "\n";
    return kExitDomainError;
  }
  return kExitUsage;
}

}  // namespace srw
