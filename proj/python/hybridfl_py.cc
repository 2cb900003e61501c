/*
 * Copyright 2026 The hybridfl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "hybridfl/config.h"
#include "hybridfl/dp_engine.h"
#include "hybridfl/fl_runtime.h"
#include "hybridfl/he_backend.h"
#include "hybridfl/metrics_report.h"
#include "hybridfl/partition_voting.h"
#include "hybridfl/vec_core.h"
#include "pybind11/pybind11.h"
#include "pybind11/stl.h"

namespace py = pybind11;

namespace hybridfl {
namespace {

void Throw(const absl::Status& s) {
  switch (s.code()) {
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kOutOfRange:
      throw py::value_error(std::string(s.message()));
    default:
      throw std::runtime_error(s.ToString());
  }
}

template <typename T>
T Unwrap(absl::StatusOr<T> v) {
  if (!v.ok()) Throw(v.status());
  return *std::move(v);
}

PartitionMask ToMask(std::vector<size_t> he_indices, size_t dim) {
  return Unwrap(PartitionMask::Create(std::move(he_indices), dim));
}

std::vector<size_t> Indices(const PartitionMask& mask) {
  return {mask.he_indices().begin(), mask.he_indices().end()};
}

// Key pair and backend bundled for Python callers.
class PyHe {
 public:
  PyHe(const std::string& backend, int ring_degree, int scale_bits,
       int modulus_bits, int max_additions, uint64_t seed) {
    HeParams params{.ring_degree = ring_degree,
                    .scale_bits = scale_bits,
                    .modulus_bits = modulus_bits,
                    .max_additions = max_additions};
    backend_ = Unwrap(MakeHeBackend(Unwrap(ParseHeBackendKind(backend)),
                                    params));
    keys_ = Unwrap(backend_->KeyGen(seed));
  }

  std::vector<Ciphertext> Encrypt(const std::vector<double>& x,
                                  uint64_t seed) const {
    return Unwrap(backend_->Encrypt(keys_.public_key, x, seed));
  }
  std::vector<Ciphertext> Add(const std::vector<Ciphertext>& a,
                              const std::vector<Ciphertext>& b) const {
    return Unwrap(backend_->AddVectors(a, b));
  }
  std::vector<double> Decrypt(const std::vector<Ciphertext>& cts,
                              size_t length) const {
    return Unwrap(backend_->Decrypt(keys_.secret_key, cts, length));
  }
  double tolerance() const { return backend_->DecodeTolerance(); }
  size_t slot_count() const { return backend_->params().slot_count(); }

 private:
  std::unique_ptr<HeBackend> backend_;
  KeyPair keys_;
};

std::string RunExperimentJson(
    const std::vector<std::pair<std::string, std::string>>& overrides,
    int workers) {
  Config config;
  for (const auto& [k, v] : overrides) {
    absl::Status s = config.Set(k, v);
    if (!s.ok()) Throw(s);
  }
  ExperimentConfig exp = Unwrap(BuildExperimentConfig(config));
  return EmitJson(RunExperiment(exp, workers));
}

}  // namespace
}  // namespace hybridfl

PYBIND11_MODULE(_hybridfl, m) {
  using namespace hybridfl;
  m.doc() = "Partitioned DP/HE protection for federated averaging";

  m.def("clip", [](const std::vector<double>& u, double theta) {
    return Unwrap(Clip(u, theta));
  }, py::arg("u"), py::arg("theta"));
  m.def("add_noise", [](const std::vector<double>& u, double sigma_z,
                        uint64_t seed) {
    return Unwrap(AddNoise(u, sigma_z, seed));
  }, py::arg("u"), py::arg("sigma_z"), py::arg("seed"));
  m.def("protect_dp", [](const std::vector<double>& u, double theta,
                         double sigma_z, uint64_t seed) {
    return Unwrap(ProtectDp(u, DpParams{theta, sigma_z}, seed));
  }, py::arg("u"), py::arg("theta"), py::arg("sigma_z"), py::arg("seed"));
  m.def("sensitivity", [](double theta, int64_t min_dataset_size) {
    return Unwrap(Sensitivity(theta, min_dataset_size));
  }, py::arg("theta"), py::arg("min_dataset_size"));
  m.def("sigma_from_budget", [](double epsilon, double delta, double q,
                                int64_t rounds, double theta,
                                int64_t min_dataset_size) {
    return Unwrap(SigmaFromBudget(PrivacyBudget{epsilon, delta, q, rounds,
                                                theta, min_dataset_size}));
  }, py::arg("epsilon"), py::arg("delta"), py::arg("q"), py::arg("rounds"),
        py::arg("theta"), py::arg("min_dataset_size"));

  m.def("split", [](const std::vector<double>& u,
                    std::vector<size_t> he_indices) {
    UpdateSplit s = Unwrap(Split(u, ToMask(std::move(he_indices), u.size())));
    return py::make_tuple(s.dp_part, s.he_part);
  }, py::arg("u"), py::arg("he_indices"),
        "Returns (dp_part, he_part).");
  m.def("merge", [](const std::vector<double>& dp_part,
                    const std::vector<double>& he_part,
                    std::vector<size_t> he_indices) {
    const size_t dim = dp_part.size() + he_part.size();
    return Unwrap(Merge(dp_part, he_part, ToMask(std::move(he_indices), dim)));
  }, py::arg("dp_part"), py::arg("he_part"), py::arg("he_indices"));

  m.def("target_count", &TargetCount, py::arg("r"), py::arg("dim"));
  m.def("propose_partition", [](const std::vector<double>& u, double r,
                                const std::string& strategy, uint64_t seed) {
    return Indices(Unwrap(ProposePartition(
        u, r, Unwrap(ParsePartitionStrategy(strategy)), seed)));
  }, py::arg("u"), py::arg("r"), py::arg("strategy") = "max",
        py::arg("seed") = 0);
  m.def("vote", [](const std::vector<std::vector<size_t>>& proposals,
                   size_t dim, size_t k, uint64_t seed, uint64_t round) {
    const VoteKey key = VoteKey::Derive(seed, round);
    std::vector<VoteMessage> msgs;
    for (size_t i = 0; i < proposals.size(); ++i) {
      std::vector<size_t> p = proposals[i];
      std::sort(p.begin(), p.end());
      msgs.push_back(Unwrap(EncryptIndices(ToMask(std::move(p), dim), key,
                                           static_cast<uint32_t>(i))));
    }
    auto winners = Unwrap(TallyVotes(msgs, static_cast<int64_t>(k)));
    return Indices(Unwrap(DecodePartition(winners, key, dim, k)));
  }, py::arg("proposals"), py::arg("dim"), py::arg("k"), py::arg("seed") = 0,
        py::arg("round") = 0,
        "Encrypted top-k vote over per-client index proposals.");

  py::class_<Ciphertext>(m, "Ciphertext")
      .def_readonly("slots_used", &Ciphertext::slots_used)
      .def_readonly("add_count", &Ciphertext::add_count)
      .def("to_bytes", [](const Ciphertext& ct) {
        return py::bytes(SerializeCiphertext(ct));
      })
      .def_static("from_bytes", [](const py::bytes& b) {
        return Unwrap(DeserializeCiphertext(std::string(b)));
      });

  py::class_<PyHe>(m, "HeContext")
      .def(py::init<const std::string&, int, int, int, int, uint64_t>(),
           py::arg("backend") = "ckks_lite", py::arg("ring_degree") = 4096,
           py::arg("scale_bits") = 20, py::arg("modulus_bits") = 50,
           py::arg("max_additions") = 256, py::arg("seed") = 1)
      .def("encrypt", &PyHe::Encrypt, py::arg("x"), py::arg("seed") = 0)
      .def("add", &PyHe::Add, py::arg("a"), py::arg("b"))
      .def("decrypt", &PyHe::Decrypt, py::arg("cts"), py::arg("length"))
      .def_property_readonly("tolerance", &PyHe::tolerance)
      .def_property_readonly("slot_count", &PyHe::slot_count);

  m.def("ratio_at", [](double r0, double lambda, bool dynamic, int64_t t) {
    return RatioAt(RatioSchedule{r0, lambda,
                                 dynamic ? RatioSchedule::Mode::kDynamic
                                         : RatioSchedule::Mode::kStatic},
                   t);
  }, py::arg("r0"), py::arg("lam"), py::arg("dynamic"), py::arg("t"));
  m.def("efficiency_ratio", [](double accuracy_pct, double time_s) {
    return Unwrap(EfficiencyRatio(accuracy_pct, time_s));
  }, py::arg("accuracy_pct"), py::arg("time_s"));
  m.def("theorem_bound", [](double c1, double c2, double r, double epsilon,
                            double delta, int64_t num_clients,
                            int64_t rounds) {
    return TheoremBound(
        BoundInputs{c1, c2, r, epsilon, delta, num_clients, rounds});
  }, py::arg("c1"), py::arg("c2"), py::arg("r"), py::arg("epsilon"),
        py::arg("delta"), py::arg("num_clients"), py::arg("rounds"));

  m.def("run_experiment_json", &RunExperimentJson, py::arg("overrides"),
        py::arg("workers") = 1,
        "Runs one experiment; overrides are (key, value) config pairs. "
        "Returns report.json text.");
  m.def("config_keys", [] {
    std::vector<std::tuple<std::string, std::string, std::string>> out;
    for (const ConfigKey& k : KnownConfigKeys()) {
      out.emplace_back(std::string(k.name), std::string(k.default_value),
                       std::string(k.help));
    }
    return out;
  });
}
