#include <benchmark/benchmark.h>

#include "valueprobe/aggregation.hpp"
#include "valueprobe/corpus.hpp"
#include "valueprobe/localization.hpp"
#include "valueprobe/scoring.hpp"

namespace {

using namespace valueprobe;

const std::filesystem::path kData = VALUEPROBE_DATA_DIR;

const Corpus& corpus() {
  static const Corpus c =
      load_corpus(kData / "corpus/probes.jsonl", kData / "corpus/culture_map.jsonl");
  return c;
}

const LocalizationResult& localized() {
  static const LocalizationResult r = [] {
    FixtureTranslator translator(kData / "fixtures/translations.jsonl");
    FixtureAligner aligner(kData / "fixtures/alignments.jsonl");
    OverrideTable overrides(kData / "fixtures/overrides.jsonl");
    LocalizationClients clients;
    clients.translator = &translator;
    clients.aligner = &aligner;
    clients.overrides = &overrides;
    return localize_corpus(corpus(), corpus().culture().languages(), clients);
  }();
  return r;
}

SyntheticBackendConfig backend_config() {
  SyntheticBackendConfig cfg;
  cfg.seed = 7;
  cfg.vocabulary = synthetic_vocabulary_for(localized().probes);
  return cfg;
}

void BM_RemaskStringMatch(benchmark::State& state) {
  RemaskInput in;
  in.probe_id = "wvs:001";
  in.language_code = "de";
  in.translated_sentence = "Für mich ist Arbeit im Leben sehr wichtig, wichtiger als Freizeit.";
  in.local_label = "wichtig";
  in.english_sentence = "For me, work in life is [MASK].";
  in.english_label_token = 6;
  for (auto _ : state) benchmark::DoNotOptimize(remask_string_match(in, nullptr));
}
BENCHMARK(BM_RemaskStringMatch);

void BM_LocalizeCorpus(benchmark::State& state) {
  FixtureTranslator translator(kData / "fixtures/translations.jsonl");
  FixtureAligner aligner(kData / "fixtures/alignments.jsonl");
  OverrideTable overrides(kData / "fixtures/overrides.jsonl");
  LocalizationClients clients;
  clients.translator = &translator;
  clients.aligner = &aligner;
  clients.overrides = &overrides;
  LocalizeOptions options;
  options.threads = static_cast<std::size_t>(state.range(0));
  const auto languages = corpus().culture().languages();
  for (auto _ : state) {
    benchmark::DoNotOptimize(localize_corpus(corpus(), languages, clients, options));
  }
}
BENCHMARK(BM_LocalizeCorpus)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_SyntheticScoring(benchmark::State& state) {
  SyntheticBackend backend(backend_config());
  const ScoreMode modes[] = {ScoreMode::Diff, ScoreMode::PosOnly, ScoreMode::NegOnly};
  ScoreOptions options;
  options.threads = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(score_corpus(backend, localized().probes, modes, options));
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(localized().probes.size()));
}
BENCHMARK(BM_SyntheticScoring)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_BuildModelMatrices(benchmark::State& state) {
  SyntheticBackend backend(backend_config());
  const ScoreMode modes[] = {ScoreMode::Diff};
  const auto scored = score_corpus(backend, localized().probes, modes);
  const auto languages = corpus().culture().languages();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        build_model_matrices(scored.scores, ScoreMode::Diff, corpus(), languages));
  }
}
BENCHMARK(BM_BuildModelMatrices)->Unit(benchmark::kMillisecond);

}  // namespace
