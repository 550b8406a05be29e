#include <benchmark/benchmark.h>

#include "cyborg/blob.hpp"
#include "cyborg/harness.hpp"
#include "cyborg/ir_camera.hpp"

using namespace cyborg;

namespace {

World indoor_world() {
    World w;
    w.arena = Arena(4.8, 6.6);
    w.sources = {make_human({4.3, 6.1}), make_oven({0.6, 5.0})};
    return w;
}

void BM_RenderIr(benchmark::State& state) {
    const World w = indoor_world();
    const CameraModel cam;
    Rng rng(1);
    const Pose p{2.4, 1.3, 0.0, 70.0};
    for (auto _ : state) benchmark::DoNotOptimize(render_ir(w, p, cam, rng));
}
BENCHMARK(BM_RenderIr);

void BM_DetectBlob(benchmark::State& state) {
    const World w = indoor_world();
    const CameraModel cam;
    Rng rng(2);
    const IrImage img = render_ir(w, Pose{2.4, 1.3, 0.0, 70.0}, cam, rng);
    for (const auto& s : kBlobScales) blob_noise_gain(s);
    for (auto _ : state) benchmark::DoNotOptimize(detect_blob(img));
}
BENCHMARK(BM_DetectBlob);

void BM_ExplorationTrial(benchmark::State& state) {
    const ExplorationConfig cfg;
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(run_exploration_trial(cfg, "levy", seed++));
}
BENCHMARK(BM_ExplorationTrial)->Unit(benchmark::kMillisecond);

void BM_IndoorMission(benchmark::State& state) {
    const MissionScenario sc = indoor_mission_scenario();
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(run_mission(sc, seed++));
}
BENCHMARK(BM_IndoorMission)->Unit(benchmark::kMillisecond);

void BM_ImuReplay(benchmark::State& state) {
    ImuStudyConfig cfg;
    Rng rng(3);
    const auto path = synthetic_walk(cfg.walk, rng);
    const auto samples = synth_gait(path, cfg.gait, rng);
    const auto ref = to_track(path);
    for (auto _ : state) benchmark::DoNotOptimize(run_imu_replay(samples, ref, cfg.gait.k_true));
}
BENCHMARK(BM_ImuReplay)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
