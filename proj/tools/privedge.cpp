// Copyright 2026 The PrivEdge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// privedge: operator commands for the two-server reconstruction classifier.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "privedge/error.hpp"
#include "privedge/io.hpp"
#include "privedge/model.hpp"
#include "privedge/oracle.hpp"
#include "privedge/rng.hpp"
#include "privedge/server.hpp"
#include "privedge/sharing.hpp"

namespace fs = std::filesystem;
using namespace privedge;
using nlohmann::json;

namespace {

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::kUsage:
      return 2;
    case ErrorKind::kParamsMismatch:
    case ErrorKind::kVersionMismatch:
    case ErrorKind::kManifestMismatch:
      return 3;
    case ErrorKind::kMalformedSpec:
    case ErrorKind::kOverflow:
    case ErrorKind::kShapeMismatch:
      return 4;
    case ErrorKind::kIo:
    case ErrorKind::kDecode:
      return 5;
    case ErrorKind::kTripleExhausted:
      return 6;
    default:
      return 7;
  }
}

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("PRIVEDGE_SEED");
  if (s == nullptr || *s == '\0') return std::nullopt;
  try {
    return std::stoull(s, nullptr, 0);
  } catch (const std::exception&) {
    fail(ErrorKind::kUsage, "PRIVEDGE_SEED is not an integer");
  }
}

RingParams ring_params(unsigned k, unsigned f) {
  RingParams p;
  p.k = static_cast<int>(k);
  p.f = static_cast<int>(f);
  try {
    p.validate();
  } catch (const Error& e) {
    fail(ErrorKind::kUsage, e.what());
  }
  return p;
}

json decision_json(const PredictionResult& r) {
  json j;
  j["outcome"] = r.outcome ? json(r.outcome_user) : json(nullptr);
  j["decision"] = decision_name(r.decision);
  return j;
}

std::uint32_t next_free_index(const fs::path& root) {
  std::uint32_t next = 0;
  if (!fs::is_directory(root)) return 0;
  for (const auto& e : fs::directory_iterator(root)) {
    unsigned idx = 0;
    if (std::sscanf(e.path().filename().string().c_str(), "session_%u", &idx) == 1) {
      next = std::max(next, static_cast<std::uint32_t>(idx + 1));
    }
  }
  return next;
}

struct Options {
  // model make
  std::string out, user = "user", kind = "random";
  double level = 0.5;
  bool bias = false;
  unsigned k = 64, f = 16;
  // model validate / share-weights
  std::string model_dir;
  // dealer
  std::vector<std::string> specs;
  unsigned count = 1;
  std::string out_s1, out_s2;
  // share
  std::string img;
  std::optional<double> tau;
  // serve
  std::string role, models, triples, listen = "127.0.0.1:0", peer, port_file;
  unsigned ot_bits = 2048;
  std::string ot_mode = "ext", lrelu_mode = "shift";
  std::size_t max_requests = 0;
  unsigned timeout_ms = 60000;
  // predict
  std::string s1, s2, uploader;
  std::vector<std::string> img_shares, threshold_shares;
  // oracle
  std::vector<std::string> model_dirs;
  // shared
  std::optional<std::uint64_t> seed;
};

std::unique_ptr<Rng> rng_for(const Options& o, std::uint64_t stream) {
  auto seed = o.seed ? o.seed : env_seed();
  return make_rng(seed, stream);
}

inference::ProtocolConfig protocol_config(const Options& o) {
  inference::ProtocolConfig cfg;
  if (o.ot_mode == "ext") {
    cfg.ot.mode = gc::OtMode::kExtension;
  } else if (o.ot_mode == "rsa") {
    cfg.ot.mode = gc::OtMode::kRsa;
  } else {
    fail(ErrorKind::kUsage, "--ot-mode must be ext or rsa");
  }
  require(o.ot_bits >= 512 && o.ot_bits % 64 == 0, ErrorKind::kUsage,
          "--ot-bits must be a multiple of 64 and at least 512");
  cfg.ot.modulus_bits = static_cast<int>(o.ot_bits);
  if (o.lrelu_mode == "shift") {
    cfg.lrelu = gc::LreluMode::kInCircuitShift;
  } else if (o.lrelu_mode == "local") {
    cfg.lrelu = gc::LreluMode::kLocalScale;
  } else {
    fail(ErrorKind::kUsage, "--lrelu-mode must be shift or local");
  }
  return cfg;
}

int cmd_model_make(const Options& o) {
  auto spec = model::desk_spec(o.user, ring_params(o.k, o.f), o.bias || o.kind == "constant");
  auto rng = rng_for(o, 1);
  std::vector<model::FloatLayer> w;
  if (o.kind == "random") {
    w = model::random_weights(spec, *rng);
  } else if (o.kind == "constant") {
    w = model::constant_weights(spec, *rng, o.level);
  } else {
    fail(ErrorKind::kUsage, "--kind must be random or constant");
  }
  model::save_model(o.out, spec, w);
  std::cout << json{{"model", o.out}, {"user", o.user}}.dump() << "\n";
  return 0;
}

int cmd_model_validate(const Options& o) {
  const auto spec = model::ReconstructorSpec::parse(io::read_text(fs::path(o.model_dir) / "model.json"));
  const auto v = model::validate_undercomplete(spec);
  std::cout << json{{"accepted", v.accepted},
                    {"reason", v.reason},
                    {"bottleneck", v.bottleneck},
                    {"input", v.input}}
                   .dump()
            << "\n";
  return v.accepted ? 0 : 1;
}

int cmd_dealer_gen(const Options& o) {
  require(!o.specs.empty(), ErrorKind::kUsage, "dealer gen needs at least one --spec");
  require(o.count >= 1, ErrorKind::kUsage, "--count must be positive");
  std::vector<model::ReconstructorSpec> specs;
  for (const auto& s : o.specs) {
    specs.push_back(model::ReconstructorSpec::parse(io::read_text(s)));
  }
  auto rng = rng_for(o, 2);
  const std::uint32_t start = std::max(next_free_index(o.out_s1), next_free_index(o.out_s2));
  std::uint64_t bytes = 0;
  for (std::uint32_t i = 0; i < o.count; ++i) {
    const auto d1 = server::triple_session_dir(o.out_s1, start + i);
    const auto d2 = server::triple_session_dir(o.out_s2, start + i);
    fs::create_directories(d1);
    fs::create_directories(d2);
    for (const auto& spec : specs) {
      auto [a, b] = deal_triples(model::triple_plan(spec), 1, spec.params, *rng);
      a.save(server::triple_file(d1, spec.user_id));
      b.save(server::triple_file(d2, spec.user_id));
      bytes += a.serialized_bytes() + b.serialized_bytes();
    }
  }
  std::cout << json{{"sessions", o.count}, {"first_index", start}, {"bytes", bytes}}.dump()
            << "\n";
  return 0;
}

int cmd_share_weights(const Options& o) {
  const auto m = model::load_model(o.model_dir);
  const auto v = model::validate_undercomplete(m.spec);
  require(v.accepted, ErrorKind::kMalformedSpec, "model rejected: " + v.reason);
  auto rng = rng_for(o, 3);
  const auto [a, b] = model::share_weights(m, *rng, o.tau);
  model::save_model_shares(o.out_s1, a);
  model::save_model_shares(o.out_s2, b);
  std::cout << json{{"user", m.spec.user_id},
                    {"manifest_sha256", model::digest_hex(a.manifest_hash())}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_share_image(const Options& o) {
  const auto img = model::load_image(o.img, ring_params(o.k, o.f));
  auto rng = rng_for(o, 4);
  const auto [a, b] = sharing::share(img, *rng);
  model::save_tensor_share(o.out_s1, model::BundleKind::kImage, a);
  model::save_tensor_share(o.out_s2, model::BundleKind::kImage, b);
  std::cout << json{{"shape", img.shape}}.dump() << "\n";
  return 0;
}

int cmd_share_threshold(const Options& o) {
  const RingParams p = ring_params(o.k, o.f);
  require(o.tau.has_value(), ErrorKind::kUsage, "--tau is required");
  RingTensor t{p, {1}, {encode(*o.tau, p).value}};
  auto rng = rng_for(o, 5);
  const auto [a, b] = sharing::share(t, *rng);
  model::save_tensor_share(o.out_s1, model::BundleKind::kThreshold, a);
  model::save_tensor_share(o.out_s2, model::BundleKind::kThreshold, b);
  std::cout << json{{"tau", *o.tau}}.dump() << "\n";
  return 0;
}

int cmd_serve(const Options& o) {
  server::ServerConfig cfg;
  if (o.role == "s1") {
    cfg.role = Party::kS1;
  } else if (o.role == "s2") {
    cfg.role = Party::kS2;
  } else {
    fail(ErrorKind::kUsage, "--role must be s1 or s2");
  }
  cfg.models_dir = o.models;
  cfg.triples_dir = o.triples;
  cfg.listen = o.listen;
  cfg.peer = o.peer;
  cfg.protocol = protocol_config(o);
  cfg.seed = o.seed ? o.seed : env_seed();
  cfg.timeout = std::chrono::milliseconds(o.timeout_ms);
  cfg.max_requests = o.max_requests;
  server::Server srv(cfg);
  if (cfg.role == Party::kS1) {
    // s2 may still be starting; retry plain connection failures only.
    const auto deadline = std::chrono::steady_clock::now() + cfg.timeout;
    for (;;) {
      try {
        srv.probe_peer();
        break;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kChannel || std::chrono::steady_clock::now() > deadline) {
          throw;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
      }
    }
  }
  if (!o.port_file.empty()) io::write_text(o.port_file, std::to_string(srv.port()) + "\n");
  std::cerr << o.role << " listening on port " << srv.port() << " with "
            << srv.models().size() << " models" << std::endl;
  srv.run();
  return 0;
}

std::pair<ShareTensor, ShareTensor> load_pair(const std::vector<std::string>& files,
                                              model::BundleKind kind) {
  require(files.size() == 2, ErrorKind::kUsage, "share options take two files (s1, s2)");
  return {model::load_tensor_share(files[0], kind), model::load_tensor_share(files[1], kind)};
}

int cmd_predict(const Options& o) {
  require(!o.uploader.empty(), ErrorKind::kUsage, "--uploader is required");
  auto image = load_pair(o.img_shares, model::BundleKind::kImage);
  std::optional<std::pair<ShareTensor, ShareTensor>> tau;
  if (!o.threshold_shares.empty()) {
    tau = load_pair(o.threshold_shares, model::BundleKind::kThreshold);
  }
  auto rng = rng_for(o, 6);
  SessionId sid{rng->next_u64(), rng->next_u64()};
  if (sid.lo == 0 && sid.hi == 0) sid.lo = 1;
  const auto r = server::remote_predict(o.s1, o.s2, sid, o.uploader, image, tau,
                                        std::chrono::milliseconds(o.timeout_ms));
  json j = decision_json(r.result);
  j["session"] = r.session.hex();
  j["timings"] = {{"offline_bytes", r.offline_bytes},
                  {"online_bytes", r.online_bytes},
                  {"online_ms", r.online_ms}};
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_oracle_eval(const Options& o) {
  require(!o.model_dirs.empty(), ErrorKind::kUsage, "oracle eval needs at least one --model");
  std::vector<oracle::OracleModel> models;
  for (const auto& d : o.model_dirs) {
    auto m = model::load_model(d);
    models.push_back({m.spec, m.weights, std::nullopt});
  }
  const RingParams p = models.front().spec.params;
  require(o.tau.has_value(), ErrorKind::kUsage, "--tau is required");
  const auto img = model::load_image(o.img, p);
  const auto pred = oracle::oracle_predict(models, img, encode(*o.tau, p).value,
                                           o.uploader);
  json j = decision_json(pred.result);
  std::vector<double> ds;
  for (Word d : pred.dissimilarities) ds.push_back(decode({d}, p));
  j["dissimilarities"] = ds;
  j["argmin"] = pred.argmin;
  std::cout << j.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"privedge: private reconstruction-based image classification"};
  app.set_config("--config");
  app.require_subcommand(1);
  Options o;
  app.add_option("--seed", o.seed, "Deterministic randomness (tests only)");

  auto* model_cmd = app.add_subcommand("model", "Create and check reconstructor models");
  model_cmd->require_subcommand(1);
  auto* make = model_cmd->add_subcommand("make", "Write a desk-architecture model");
  make->add_option("--out", o.out)->required();
  make->add_option("--user", o.user);
  make->add_option("--kind", o.kind)->check(CLI::IsMember({"random", "constant"}));
  make->add_option("--level", o.level);
  make->add_flag("--bias", o.bias);
  make->add_option("--k", o.k);
  make->add_option("--f", o.f);
  auto* validate = model_cmd->add_subcommand("validate", "Run the under-complete check");
  validate->add_option("--model", o.model_dir)->required();

  auto* dealer = app.add_subcommand("dealer", "Offline triple generation");
  dealer->require_subcommand(1);
  auto* gen = dealer->add_subcommand("gen", "Deal one set of triples per prediction");
  gen->add_option("--spec", o.specs)->required();
  gen->add_option("--count", o.count);
  gen->add_option("--out-s1", o.out_s1)->required();
  gen->add_option("--out-s2", o.out_s2)->required();

  auto* user = app.add_subcommand("user", "Secret-share user inputs");
  user->require_subcommand(1);
  auto* sw = user->add_subcommand("share-weights", "Share a model between the servers");
  sw->add_option("--model", o.model_dir)->required();
  sw->add_option("--tau", o.tau, "Per-user threshold");
  auto* si = user->add_subcommand("share-image", "Share an image between the servers");
  si->add_option("--img", o.img)->required();
  si->add_option("--k", o.k);
  si->add_option("--f", o.f);
  auto* st = user->add_subcommand("share-threshold", "Share the global threshold");
  st->add_option("--tau", o.tau)->required();
  st->add_option("--k", o.k);
  st->add_option("--f", o.f);
  for (auto* c : {sw, si, st}) {
    c->add_option("--out-s1", o.out_s1)->required();
    c->add_option("--out-s2", o.out_s2)->required();
  }

  auto* serve = app.add_subcommand("serve", "Run the s1 or s2 endpoint");
  serve->add_option("--role", o.role)->required()->check(CLI::IsMember({"s1", "s2"}));
  serve->add_option("--models", o.models)->required();
  serve->add_option("--triples", o.triples)->required();
  serve->add_option("--listen", o.listen)->envname("PRIVEDGE_LISTEN_ADDR");
  serve->add_option("--peer", o.peer)->envname("PRIVEDGE_PEER_ADDR");
  serve->add_option("--port-file", o.port_file);
  serve->add_option("--ot-bits", o.ot_bits);
  serve->add_option("--ot-mode", o.ot_mode)->check(CLI::IsMember({"ext", "rsa"}));
  serve->add_option("--lrelu-mode", o.lrelu_mode)->check(CLI::IsMember({"shift", "local"}));
  serve->add_option("--max-requests", o.max_requests);
  serve->add_option("--timeout-ms", o.timeout_ms);

  auto* predict = app.add_subcommand("predict", "Ask both servers for a decision");
  predict->add_option("--s1", o.s1)->required();
  predict->add_option("--s2", o.s2)->required();
  predict->add_option("--uploader", o.uploader)->required();
  predict->add_option("--img-shares", o.img_shares)->required()->expected(2);
  predict->add_option("--threshold-shares", o.threshold_shares)->expected(2);
  predict->add_option("--timeout-ms", o.timeout_ms);

  auto* oracle_cmd = app.add_subcommand("oracle", "Cleartext reference runs");
  oracle_cmd->require_subcommand(1);
  auto* eval = oracle_cmd->add_subcommand("eval", "Cleartext prediction over model dirs");
  eval->add_option("--model", o.model_dirs)->required();
  eval->add_option("--img", o.img)->required();
  eval->add_option("--uploader", o.uploader)->required();
  eval->add_option("--tau", o.tau)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*make) return cmd_model_make(o);
    if (*validate) return cmd_model_validate(o);
    if (*gen) return cmd_dealer_gen(o);
    if (*sw) return cmd_share_weights(o);
    if (*si) return cmd_share_image(o);
    if (*st) return cmd_share_threshold(o);
    if (*serve) return cmd_serve(o);
    if (*predict) return cmd_predict(o);
    if (*eval) return cmd_oracle_eval(o);
  } catch (const Error& e) {
    std::cerr << "error=" << error_kind_name(e.kind()) << " " << e.what() << std::endl;
    return exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error=IoError " << e.what() << std::endl;
    return 5;
  }
  return 2;
}
