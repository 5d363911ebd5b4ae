// geosent: batch commands over a single JSON config.
#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "geosent/config.hpp"
#include "geosent/error.hpp"
#include "geosent/pipeline.hpp"
#include "json.hpp"

namespace {

std::string one_line(std::string s) {
  for (auto& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

int fail(const char* kind, int code, const std::string& message) {
  std::cerr << "error\t" << kind << '\t' << one_line(message) << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace geosent;

  CLI::App app{"Regional sentiment and vote share pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  app.add_option("-c,--config", config_path, "JSON config file")->required();
  app.add_option("--set", overrides, "override a config key, dotted.key=value (repeatable)");
  app.add_option("-o,--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--seed", seed, "override the config seed");

  auto* ingest = app.add_subcommand("ingest", "load posts, keep located ones, resolve regions");
  auto* clean = app.add_subcommand("clean", "normalize and filter post texts");
  auto* report = app.add_subcommand("report", "frequency reports on ingested posts");
  report->require_subcommand(1);
  auto* hashtags = report->add_subcommand("hashtags", "hashtag frequencies");
  auto* emojis = report->add_subcommand("emojis", "emoji frequencies");
  auto* train = app.add_subcommand("train", "fit the sentiment classifier");
  auto* classify = app.add_subcommand("classify", "label cleaned posts");
  auto* import = app.add_subcommand("import-predictions", "use external id,label predictions");
  std::string predictions_path;
  import->add_option("file", predictions_path, "CSV with id,label")->required();
  auto* aggregate = app.add_subcommand("aggregate", "per-region sentiment counts");
  auto* shift = app.add_subcommand("shift-test", "before/after chi-square tests");
  auto* regress = app.add_subcommand("regress", "OLS of vote share on region features");
  auto* stepwise = app.add_subcommand("stepwise", "AIC stepwise selection");
  auto* pipeline = app.add_subcommand("pipeline", "run every stage and write summary.md");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", 1, e.what());
  }

  try {
    if (seed) overrides.push_back("seed=" + std::to_string(*seed));
    pipeline::Context ctx;
    ctx.config = load_config(config_path, overrides);
    validate_paths(ctx.config);
    ctx.out = out_dir;
    ctx.warn = [](std::string_view msg) { std::cerr << "warning\t" << one_line(std::string(msg)) << '\n'; };

    if (*ingest) pipeline::ingest(ctx);
    else if (*clean) pipeline::clean(ctx);
    else if (*hashtags) pipeline::report_hashtags(ctx);
    else if (*emojis) pipeline::report_emojis(ctx);
    else if (*train) pipeline::train(ctx);
    else if (*classify) pipeline::classify(ctx);
    else if (*import) pipeline::import_predictions(ctx, predictions_path);
    else if (*aggregate) pipeline::aggregate(ctx);
    else if (*shift) pipeline::shift_test(ctx);
    else if (*regress) pipeline::regress(ctx);
    else if (*stepwise) pipeline::stepwise(ctx);
    else if (*pipeline) pipeline::run_all(ctx);
  } catch (const UsageError& e) {
    return fail("usage", e.exit_code(), e.what());
  } catch (const DataError& e) {
    return fail("data", e.exit_code(), e.what());
  } catch (const NumericalError& e) {
    return fail("numerical", e.exit_code(), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail("data", 2, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail("usage", 1, e.what());
  } catch (const std::exception& e) {
    return fail("data", 2, e.what());
  }
  return 0;
}
