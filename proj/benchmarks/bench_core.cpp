//
// Copyright 2026 The OTAFD Authors
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
//

#include <benchmark/benchmark.h>

#include <vector>

#include "otafd/channel.hpp"
#include "otafd/distill.hpp"
#include "otafd/learner.hpp"
#include "otafd/transceiver.hpp"

namespace {

using namespace otafd;

struct BenchProblem {
  ChannelRealization channel;
  ClassPartition partition;
  std::vector<double> powers;
  std::vector<double> rhos;
};

BenchProblem make_problem(int devices, int classes) {
  Rng rng(1);
  BenchProblem p;
  p.channel.noise_var = 1e-8;
  for (int i = 0; i < devices; ++i) {
    p.channel.coeffs.push_back(sample_small_scale(rng) * 1e-2);
  }
  std::vector<std::int64_t> counts(static_cast<std::size_t>(devices) * classes);
  for (auto& c : counts) c = 1 + static_cast<std::int64_t>(rng.below(60));
  p.partition = ClassPartition::from_counts(devices, classes, std::move(counts));
  p.powers.assign(static_cast<std::size_t>(devices), 1e-3);
  p.rhos.resize(static_cast<std::size_t>(devices));
  for (double& r : p.rhos) r = rng.uniform(0.01, 10.0);
  return p;
}

void BM_PathLossGain(benchmark::State& state) {
  const DeviceGeometry geom{250.0, 915e6, 3.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(path_loss_gain(geom));
  }
}
BENCHMARK(BM_PathLossGain);

void BM_RealizeRound(benchmark::State& state) {
  const std::vector<DeviceGeometry> geoms(
      static_cast<std::size_t>(state.range(0)), DeviceGeometry{250.0, 915e6, 3.0});
  Rng rng(7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(realize_round(geoms, 1e-8, rng));
  }
}
BENCHMARK(BM_RealizeRound)->Arg(10)->Arg(50);

void BM_DesignRound(benchmark::State& state) {
  const BenchProblem p = make_problem(static_cast<int>(state.range(0)),
                                      static_cast<int>(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(design_round(400, p.channel, p.partition, p.powers,
                                          p.rhos, p.partition.num_classes));
  }
}
BENCHMARK(BM_DesignRound)->Args({10, 10})->Args({50, 10});

void BM_Phi2(benchmark::State& state) {
  const BenchProblem p = make_problem(50, 10);
  const TransceiverDesign design =
      design_round(400, p.channel, p.partition, p.powers, p.rhos, 10);
  for (auto _ : state) {
    benchmark::DoNotOptimize(phi2(design, p.channel, p.partition, 10));
  }
}
BENCHMARK(BM_Phi2);

void BM_GradientLinear(benchmark::State& state) {
  Rng rng(3);
  const Architecture arch{16, 0, 10};
  const ModelParams params = init_params(arch, 0.1, rng);
  LabeledDataset data;
  data.dims = 16;
  data.num_classes = 10;
  for (int s = 0; s < 256; ++s) {
    for (int d = 0; d < 16; ++d) data.features.push_back(rng.normal());
    data.labels.push_back(1 + (s % 10));
  }
  const ClassTargets targets(10, std::vector<double>(10, 0.1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(gradient(params, data, targets, 0.5));
  }
}
BENCHMARK(BM_GradientLinear);

void BM_TrainingRound(benchmark::State& state) {
  Rng data_rng(derive_seed(5, StreamTag::kDataGen, 1));
  Rng test_rng(derive_seed(5, StreamTag::kDataGen, 2));
  TrainingSetup setup;
  const LabeledDataset train = synth_dataset(10, 10, 20, 8.0, data_rng);
  setup.test_set = synth_dataset(10, 10, 10, 8.0, test_rng);
  PartitionSpec spec;
  spec.num_devices = 10;
  spec.seed = 5;
  PartitionResult split = partition(train, spec);
  setup.device_data = std::move(split.device_data);
  setup.partition = std::move(split.partition);
  setup.geometry.assign(10, DeviceGeometry{250.0, 915e6, 3.0});
  setup.noise_var = 1e-8;
  setup.powers.assign(10, 1e-3);
  setup.stringencies.assign(10, 1.0);
  setup.arch = {10, 0, 10};
  setup.hyper.gamma = 0.1;
  setup.hyper.eta0 = 0.01;
  setup.hyper.l1 = 100.0;
  setup.hyper.l2 = 1.0;
  setup.hyper.grad_bound = 10.0;
  setup.rounds = 1;
  setup.num_classes = 10;

  TrainingState model_state;
  for (int i = 0; i < 10; ++i) {
    Rng init(derive_seed(5, StreamTag::kModelInit, static_cast<std::uint64_t>(i)));
    model_state.models.push_back(init_params(setup.arch, 0.01, init));
  }
  std::int64_t t = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_round(model_state, setup, t, 100, 5));
    t = t % 100 + 1;
  }
}
BENCHMARK(BM_TrainingRound);

}  // namespace

BENCHMARK_MAIN();
