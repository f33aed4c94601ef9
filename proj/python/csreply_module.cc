/*
 * Copyright (C) 2026 The csreply Authors
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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "csreply/codeswitch.h"
#include "csreply/encoder.h"
#include "csreply/error.h"
#include "csreply/eval.h"
#include "csreply/ranker.h"
#include "csreply/responseset.h"
#include "csreply/textproc.h"
#include "csreply/trainer.h"

namespace py = pybind11;

namespace csreply {
namespace {

MRPair PairFromDict(const py::dict& d) {
  MRPair p;
  p.id = d.contains("id") ? py::str(d["id"]).cast<std::string>() : "";
  p.message = d["message"].cast<std::string>();
  p.reply = d["reply"].cast<std::string>();
  p.lang = d.contains("lang") ? ParseLang(d["lang"].cast<std::string>())
                              : Lang::kEn;
  const auto opt = [&](const char* key) -> std::optional<std::string> {
    if (!d.contains(key) || d[key].is_none()) return std::nullopt;
    return d[key].cast<std::string>();
  };
  p.message_translation = opt("message_translation");
  p.reply_translation = opt("reply_translation");
  p.sentiment = opt("sentiment");
  return p;
}

std::vector<MRPair> PairsFromList(const py::list& items) {
  std::vector<MRPair> pairs;
  for (const auto& item : items) pairs.push_back(PairFromDict(item.cast<py::dict>()));
  return pairs;
}

py::dict PairToDict(const MRPair& p) {
  py::dict d;
  d["id"] = p.id;
  d["message"] = p.message;
  d["reply"] = p.reply;
  d["lang"] = LangName(p.lang);
  if (p.message_translation) d["message_translation"] = *p.message_translation;
  if (p.reply_translation) d["reply_translation"] = *p.reply_translation;
  if (p.sentiment) d["sentiment"] = *p.sentiment;
  return d;
}

// A trained model plus its response set, for scripting the whole pipeline.
class Engine {
 public:
  Engine(Checkpoint ckpt, ResponseSet set)
      : ckpt_(std::move(ckpt)), set_(std::move(set)) {}

  static Engine Load(const std::string& model, const std::string& responses) {
    Checkpoint ckpt = LoadCheckpoint(model);
    ResponseSet set = LoadResponseSet(responses, &ckpt.vocab);
    return Engine(std::move(ckpt), std::move(set));
  }

  static Engine Fit(const py::list& corpus, int epochs, int batch_size,
                    double lr, double lambda_tr, uint64_t seed, int d_emb,
                    int d_hid, int d_out, int k_intents) {
    const std::vector<MRPair> pairs = PairsFromList(corpus);
    std::vector<TokenSeq> texts;
    for (const auto& p : pairs) {
      texts.push_back(Tokenize(p.message));
      texts.push_back(Tokenize(p.reply));
      if (p.message_translation) texts.push_back(Tokenize(*p.message_translation));
      if (p.reply_translation) texts.push_back(Tokenize(*p.reply_translation));
    }
    Checkpoint ckpt;
    ckpt.vocab = Vocab::Build(texts, 1);
    TrainConfig tc;
    tc.epochs = epochs;
    tc.batch_size = batch_size;
    tc.lr = lr;
    tc.lambda_tr = lambda_tr;
    tc.seed = seed;
    ckpt.params = Train(pairs, ckpt.vocab, tc, Dims{d_emb, d_hid, d_out}).params;
    ResponseSetOptions ro;
    ro.k_intents = k_intents;
    ro.max_size = std::max(ro.max_size, k_intents);
    ro.seed = seed;
    ResponseSet set = BuildResponseSet(pairs, ckpt.params, ckpt.vocab, ro);
    return Engine(std::move(ckpt), std::move(set));
  }

  py::list Suggest(const std::string& message, double alpha, int n1, int n2,
                   double threshold) const {
    RankConfig rc{alpha, n1, n2, threshold};
    py::list out;
    for (const auto& s : csreply::Suggest(message, ckpt_.params, ckpt_.vocab,
                                          set_, rc)) {
      py::dict d;
      d["text"] = s.text;
      d["score"] = s.score;
      d["intent_id"] = s.intent_id;
      d["entry_index"] = s.entry_index;
      out.append(d);
    }
    return out;
  }

  py::dict Evaluate(const py::list& corpus, double alpha) const {
    EvalOptions options;
    options.alpha = alpha;
    const EvalReport r = RunEval(PairsFromList(corpus), ckpt_.params,
                                 ckpt_.vocab, set_, options);
    return py::module_::import("json").attr("loads")(ReportToJson(r).dump());
  }

  void Save(const std::string& model, const std::string& responses) const {
    SaveCheckpoint(model, ckpt_);
    SaveResponseSet(responses, set_);
  }

  size_t response_set_size() const { return set_.size(); }
  size_t vocab_size() const { return ckpt_.vocab.size(); }

 private:
  Checkpoint ckpt_;
  ResponseSet set_;
};

}  // namespace
}  // namespace csreply

PYBIND11_MODULE(_core, m) {
  using namespace csreply;
  m.doc() = "Code-switched smart reply engine";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  m.def("tokenize", [](const std::string& text) { return Tokenize(text); },
        py::arg("text"));
  m.def("normalize", [](const std::string& text) { return NormalizeText(text); },
        py::arg("text"));
  m.def(
      "segment_clauses",
      [](const std::vector<std::string>& tokens) {
        std::vector<std::vector<std::string>> out;
        for (auto& c : SegmentClauses(tokens)) out.push_back(c.tokens);
        return out;
      },
      py::arg("tokens"));
  m.def(
      "synthesize_pair",
      [](const py::dict& pair, const std::string& table_path, double p_switch,
         uint64_t seed) {
        const PhraseTableLoad table = LoadPhraseTable(table_path);
        SwitchConfig cfg;
        cfg.p_switch = p_switch;
        cfg.rng_seed = seed;
        Rng rng(seed);
        return PairToDict(SynthesizePair(PairFromDict(pair), table.table, cfg, rng));
      },
      py::arg("pair"), py::arg("table_path"), py::arg("p_switch") = 0.3,
      py::arg("seed") = 42);
  m.def(
      "symmetric_loss",
      [](const std::vector<std::vector<double>>& s) {
        Tensor t(s.size(), s.size());
        for (size_t i = 0; i < s.size(); ++i) {
          if (s[i].size() != s.size()) {
            throw Error(ErrorCode::kInvalidArgument, "matrix must be square");
          }
          for (size_t j = 0; j < s.size(); ++j) t(i, j) = s[i][j];
        }
        return SymmetricLoss(t);
      },
      py::arg("s"));
  m.def("mrr", [](const std::vector<size_t>& ranks) { return Mrr(ranks); },
        py::arg("ranks"));
  m.def("random_baseline_mrr", &RandomBaselineMrr, py::arg("set_size"));

  py::class_<Engine>(m, "Engine")
      .def_static("load", &Engine::Load, py::arg("model"), py::arg("responses"))
      .def_static("fit", &Engine::Fit, py::arg("corpus"), py::arg("epochs") = 30,
                  py::arg("batch_size") = 32, py::arg("lr") = 1e-3,
                  py::arg("lambda_tr") = 0.5, py::arg("seed") = 42,
                  py::arg("d_emb") = 64, py::arg("d_hid") = 128,
                  py::arg("d_out") = 64, py::arg("k_intents") = 8)
      .def("suggest", &Engine::Suggest, py::arg("message"),
           py::arg("alpha") = 0.3, py::arg("n1") = 30, py::arg("n2") = 3,
           py::arg("jaccard_threshold") = 0.5)
      .def("evaluate", &Engine::Evaluate, py::arg("corpus"),
           py::arg("alpha") = 0.3)
      .def("save", &Engine::Save, py::arg("model"), py::arg("responses"))
      .def_property_readonly("response_set_size", &Engine::response_set_size)
      .def_property_readonly("vocab_size", &Engine::vocab_size);
}
