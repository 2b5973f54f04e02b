// Copyright 2026 The prefsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// prefsynth: turns scored candidate responses into preference datasets.
//
//   prefsynth verify      --config c.yaml --input in.jsonl --scored out.jsonl
//   prefsynth build       --config c.yaml --input in.jsonl --output prefs.jsonl
//   prefsynth losses      --config c.yaml --scored s.jsonl --output l.jsonl
//   prefsynth mock-sample --config c.yaml --count 100 -n 2 --output in.jsonl
//   prefsynth report      --scored s.jsonl --output report.json

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "prefsynth/config.h"
#include "prefsynth/error.h"
#include "prefsynth/mock_sampler.h"
#include "prefsynth/pipeline.h"
#include "prefsynth/records.h"
#include "prefsynth/report.h"

namespace {

using prefsynth::PipelineConfig;

struct CommonFlags {
  std::string config;
  std::string input;
  std::string scored;
  std::string report;
  std::string rejects;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  bool deterministic_order = false;
};

void AddCommon(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("-c,--config", flags.config, "YAML configuration")
      ->required();
  cmd->add_option("--seed", flags.seed, "random seed (overrides config)");
  cmd->add_option("--workers", flags.workers,
                  "verification threads, 0 = all cores");
  cmd->add_flag("--deterministic-order", flags.deterministic_order,
                "emit records in input order");
}

PipelineConfig LoadWithOverrides(const CommonFlags& flags) {
  PipelineConfig config = prefsynth::LoadConfig(flags.config);
  if (!flags.input.empty()) config.io.input = flags.input;
  if (!flags.scored.empty()) config.io.scored = flags.scored;
  if (!flags.report.empty()) config.io.report = flags.report;
  if (!flags.rejects.empty()) config.io.rejects = flags.rejects;
  if (flags.seed) config.seed = *flags.seed;
  if (flags.workers) config.workers = *flags.workers;
  if (flags.deterministic_order) config.deterministic_order = true;
  return config;
}

void PrintSummary(const prefsynth::RunReport& report) {
  std::cerr << prefsynth::RenderReportTable(report);
}

int RunMockSample(const std::string& config_path, const std::string& prompts,
                  std::size_t count, std::size_t n, std::uint64_t seed,
                  const std::string& output) {
  const PipelineConfig config = prefsynth::LoadConfig(config_path);
  std::vector<std::string> prompt_texts;
  if (!prompts.empty()) {
    prefsynth::ForEachLine(prompts, [&](std::size_t, const std::string& line) {
      prompt_texts.push_back(line);
    });
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      prompt_texts.push_back("prompt " + std::to_string(i));
    }
  }
  prefsynth::LineWriter out(output);
  for (std::size_t i = 0; i < prompt_texts.size(); ++i) {
    prefsynth::Instance inst;
    inst.instance_id = "p" + std::to_string(i);
    inst.prompt = prompt_texts[i];
    inst.candidates =
        prefsynth::MockSample(inst.prompt, n, seed, config.sampler);
    out.Write(prefsynth::SerializeInstance(inst));
  }
  out.Close();
  std::cerr << "wrote " << out.lines() << " instances to " << output << "\n";
  return 0;
}

int RunReportCommand(const std::string& scored, const std::string& run_report,
                     const std::string& output) {
  prefsynth::RunReport report;
  if (!run_report.empty()) {
    std::ifstream in(run_report);
    if (!in) {
      throw prefsynth::Error(prefsynth::ErrorCode::kIo,
                             "cannot open '" + run_report + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    report = prefsynth::ReportFromJson(buffer.str());
  } else {
    report = prefsynth::SummarizeScoredFile(scored);
  }
  if (!output.empty()) prefsynth::EmitReport(report, output);
  std::cout << prefsynth::RenderReportTable(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prefsynth: constraint-verified preference data builder"};
  app.require_subcommand(1);

  CommonFlags verify_flags;
  CLI::App* verify = app.add_subcommand("verify", "score candidates only");
  AddCommon(verify, verify_flags);
  verify->add_option("-i,--input", verify_flags.input, "input JSONL");
  verify->add_option("-o,--scored,--output", verify_flags.scored,
                     "scored JSONL output");
  verify->add_option("--report", verify_flags.report, "run report JSON");
  verify->add_option("--rejects", verify_flags.rejects,
                     "malformed-line sidecar");

  CommonFlags build_flags;
  std::string build_output, ranked_output, loss_output, validation_output;
  std::optional<double> holdout;
  bool emit_loss = false;
  CLI::App* build = app.add_subcommand("build", "run the full pipeline");
  AddCommon(build, build_flags);
  build->add_option("-i,--input", build_flags.input, "input JSONL");
  build->add_option("-o,--output", build_output, "preference JSONL output");
  build->add_option("--ranked", ranked_output, "ranked-list JSONL output");
  build->add_option("--scored", build_flags.scored, "scored JSONL output");
  build->add_option("--report", build_flags.report, "run report JSON");
  build->add_option("--rejects", build_flags.rejects,
                    "malformed-line sidecar");
  build->add_flag("--emit-loss", emit_loss, "write loss oracle records");
  build->add_option("--loss-output", loss_output, "loss JSONL output");
  build->add_option("--holdout", holdout,
                    "fraction of groups routed to the validation output");
  build->add_option("--validation-output", validation_output,
                    "validation preference JSONL output");

  std::string losses_config, losses_scored, losses_output;
  CLI::App* losses = app.add_subcommand("losses", "loss oracle over scores");
  losses->add_option("-c,--config", losses_config, "YAML configuration")
      ->required();
  losses->add_option("-s,--scored", losses_scored, "scored JSONL input")
      ->required();
  losses->add_option("-o,--output", losses_output, "loss JSONL output")
      ->required();

  std::string sample_config, sample_prompts, sample_output;
  std::size_t sample_count = 0;
  std::size_t sample_n = 2;
  std::uint64_t sample_seed = 0;
  CLI::App* sample =
      app.add_subcommand("mock-sample", "generate fixture candidates");
  sample->add_option("-c,--config", sample_config, "YAML with a sampler block")
      ->required();
  auto* prompts_opt =
      sample->add_option("--prompts", sample_prompts, "one prompt per line");
  auto* count_opt =
      sample->add_option("--count", sample_count, "synthetic prompt count");
  prompts_opt->excludes(count_opt);
  sample->add_option("-n", sample_n, "candidates per prompt")
      ->check(CLI::PositiveNumber);
  sample->add_option("--seed", sample_seed, "random seed");
  sample->add_option("-o,--output", sample_output, "instance JSONL output")
      ->required();

  std::string report_scored, report_run, report_output;
  CLI::App* report = app.add_subcommand("report", "CSR statistics");
  auto* scored_opt =
      report->add_option("-s,--scored", report_scored, "scored JSONL input");
  auto* run_opt = report->add_option("--run-report", report_run,
                                     "render an existing run report");
  scored_opt->excludes(run_opt);
  report->add_option("-o,--output", report_output, "report JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return prefsynth::ExitCodeFor(prefsynth::ErrorCode::kConfig);
  }

  try {
    if (*verify) {
      const PipelineConfig config = LoadWithOverrides(verify_flags);
      PrintSummary(prefsynth::RunVerify(config));
    } else if (*build) {
      PipelineConfig config = LoadWithOverrides(build_flags);
      if (!build_output.empty()) config.io.preferences = build_output;
      if (!ranked_output.empty()) config.io.ranked = ranked_output;
      if (!loss_output.empty()) config.io.losses = loss_output;
      if (emit_loss) config.emit_loss = true;
      if (holdout) config.holdout_fraction = *holdout;
      if (!validation_output.empty()) config.io.validation = validation_output;
      prefsynth::ValidateConfig(config);
      PrintSummary(prefsynth::RunPipeline(config));
    } else if (*losses) {
      const PipelineConfig config = prefsynth::LoadConfig(losses_config);
      const prefsynth::RunReport r =
          prefsynth::RunLosses(config, losses_scored, losses_output);
      std::cerr << "wrote " << r.losses_emitted << " loss records\n";
    } else if (*sample) {
      if (sample_prompts.empty() && sample_count == 0) {
        std::cerr << "mock-sample: pass --prompts or --count\n";
        return prefsynth::ExitCodeFor(prefsynth::ErrorCode::kConfig);
      }
      return RunMockSample(sample_config, sample_prompts, sample_count,
                           sample_n, sample_seed, sample_output);
    } else if (*report) {
      if (report_scored.empty() && report_run.empty()) {
        std::cerr << "report: pass --scored or --run-report\n";
        return prefsynth::ExitCodeFor(prefsynth::ErrorCode::kConfig);
      }
      return RunReportCommand(report_scored, report_run, report_output);
    }
  } catch (const prefsynth::Error& e) {
    std::cerr << "prefsynth: " << prefsynth::ErrorCodeName(e.code()) << ": "
              << e.what() << "\n";
    return prefsynth::ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::cerr << "prefsynth: internal error: " << e.what() << "\n";
    return prefsynth::ExitCodeFor(prefsynth::ErrorCode::kInternal);
  }
  return 0;
}
