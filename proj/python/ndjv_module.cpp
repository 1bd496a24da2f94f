#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstdlib>
#include <fstream>

#include "ndv/common/error.hpp"
#include "ndv/corpus/corpus.hpp"
#include "ndv/embed/store.hpp"
#include "ndv/eval/annotation.hpp"
#include "ndv/eval/metrics.hpp"
#include "ndv/index/flat_index.hpp"
#include "ndv/nermask/backend.hpp"
#include "ndv/pipeline/pipeline.hpp"

namespace py = pybind11;
using namespace ndv;

namespace {

corpus::Article article_from(py::handle h) {
  if (py::isinstance<corpus::Article>(h)) return h.cast<corpus::Article>();
  if (py::isinstance<py::dict>(h)) {
    const auto json_text = py::module_::import("json").attr("dumps")(h).cast<std::string>();
    return corpus::validate_article(nlohmann::json::parse(json_text));
  }
  throw py::type_error("expected an Article or a dict with id, source, date and text");
}

std::vector<corpus::Article> articles_from(const py::iterable& items) {
  std::vector<corpus::Article> out;
  for (auto h : items) out.push_back(article_from(h));
  return out;
}

pipeline::PipelineConfig make_config(const std::string& ner_backend, const std::string& ner_model,
                                     const std::string& embed_backend, const std::string& model,
                                     std::size_t dim, unsigned workers) {
  pipeline::PipelineConfig c;
  c.ner_backend = ner_backend;
  c.ner_model_name = ner_model;
  c.embed_backend = embed_backend;
  c.model_name = model;
  c.stub_dim = dim;
  c.workers = workers;
  return c;
}

// Read-only (count, dim) view whose lifetime is tied to a copy of the store.
py::array_t<float> matrix_view(const embed::EmbeddingStore& store) {
  auto* keep = new embed::EmbeddingStore(store);
  py::capsule owner(keep, [](void* p) { delete static_cast<embed::EmbeddingStore*>(p); });
  py::array_t<float> arr({keep->count(), keep->dim()},
                         {keep->dim() * sizeof(float), sizeof(float)}, keep->matrix().data(), owner);
  py::detail::array_proxy(arr.ptr())->flags &= ~py::detail::npy_api::NPY_ARRAY_WRITEABLE_;
  return arr;
}

embed::EmbeddingStore store_from_numpy(
    const py::array_t<float, py::array::c_style | py::array::forcecast>& m,
    std::vector<std::string> ids) {
  if (m.ndim() != 2) throw py::value_error("expected a 2-d array");
  std::vector<float> data(m.data(), m.data() + m.size());
  return embed::EmbeddingStore::from_rows(std::size_t(m.shape(1)), std::move(data), std::move(ids));
}

py::dict hit_dict(const index::SearchHit& h) {
  py::dict d;
  d["id"] = h.id;
  d["ordinal"] = h.ordinal;
  d["score"] = h.score;
  return d;
}

}  // namespace

PYBIND11_MODULE(ndjv, m) {
  m.doc() = "Masked-entity retrieval of historical news articles";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<StageError>(m, "StageError", base.ptr());
  py::register_exception<BackendUnavailable>(m, "BackendUnavailable", base.ptr());
  py::register_exception<ProtocolError>(m, "ProtocolError", base.ptr());

  py::class_<corpus::Article>(m, "Article")
      .def(py::init([](std::string id, std::string source, std::string date, std::string text,
                       std::optional<std::string> headline) {
             nlohmann::json j = {{"id", id}, {"source", source}, {"date", date}, {"text", text}};
             if (headline) j["headline"] = *headline;
             return corpus::validate_article(j);
           }),
           py::arg("id"), py::arg("source"), py::arg("date"), py::arg("text"),
           py::arg("headline") = py::none())
      .def_readonly("id", &corpus::Article::id)
      .def_readonly("source", &corpus::Article::source)
      .def_readonly("date", &corpus::Article::date)
      .def_readonly("text", &corpus::Article::text)
      .def_readonly("headline", &corpus::Article::headline)
      .def("__eq__", [](const corpus::Article& a, const corpus::Article& b) { return a == b; })
      .def("__repr__", [](const corpus::Article& a) { return "<Article " + a.id + ">"; });

  py::class_<ner::TokenAnnotation>(m, "TokenAnnotation")
      .def_readonly("token", &ner::TokenAnnotation::token)
      .def_readonly("start", &ner::TokenAnnotation::start)
      .def_readonly("end", &ner::TokenAnnotation::end)
      .def_property_readonly("tag", [](const ner::TokenAnnotation& t) { return t.tag.str(); });

  py::class_<ner::AnnotatedArticle>(m, "AnnotatedArticle")
      .def_readonly("article", &ner::AnnotatedArticle::article)
      .def_readonly("annotations", &ner::AnnotatedArticle::annotations);

  py::class_<ner::MaskedArticle>(m, "MaskedArticle")
      .def_readonly("id", &ner::MaskedArticle::id)
      .def_readonly("masked_text", &ner::MaskedArticle::masked_text)
      .def_readonly("span_count", &ner::MaskedArticle::span_count)
      .def_readonly("mask_count", &ner::MaskedArticle::mask_count);

  py::class_<embed::EmbeddingStore>(m, "EmbeddingStore")
      .def(py::init(&store_from_numpy), py::arg("matrix"), py::arg("ids"))
      .def_property_readonly("dim", &embed::EmbeddingStore::dim)
      .def_property_readonly("count", &embed::EmbeddingStore::count)
      .def_property_readonly("ids", &embed::EmbeddingStore::ids)
      .def_property_readonly("matrix", &matrix_view)
      .def("__len__", &embed::EmbeddingStore::count)
      .def("__eq__", [](const embed::EmbeddingStore& a, const embed::EmbeddingStore& b) { return a == b; });

  m.def("read_store", [](const std::filesystem::path& p) { return embed::read_store(p); },
        py::arg("path"));
  m.def("write_store", &embed::write_store, py::arg("store"), py::arg("path"));

  m.def(
      "download",
      [](const std::string& spec, std::optional<std::filesystem::path> manifest) {
        if (!manifest) {
          const char* env = std::getenv("NDV_MANIFEST");
          if (env == nullptr) throw py::value_error("pass manifest= or set NDV_MANIFEST");
          manifest = env;
        }
        return pipeline::download(spec, corpus::load_manifest(*manifest)).articles;
      },
      py::arg("spec"), py::arg("manifest") = py::none());

  m.def(
      "ner",
      [](const py::iterable& corpus, const std::string& model, const std::string& backend,
         unsigned workers) {
        const auto articles = articles_from(corpus);
        py::gil_scoped_release release;
        return pipeline::Pipeline(make_config(backend, model, "stub", std::string(embed::kDefaultModel),
                                              embed::kStubDim, workers))
            .ner(articles);
      },
      py::arg("corpus"), py::arg("model") = std::string(ner::kDefaultNerModel),
      py::arg("backend") = "stub", py::arg("workers") = 1);

  m.def("mask", [](const std::vector<ner::AnnotatedArticle>& a) { return pipeline::Pipeline::mask(a); },
        py::arg("ner_outputs"));

  m.def(
      "embed",
      [](const std::vector<ner::MaskedArticle>& masked, const std::string& model,
         const std::string& backend, std::size_t dim, unsigned workers) {
        py::gil_scoped_release release;
        return pipeline::Pipeline(make_config("stub", std::string(ner::kDefaultNerModel), backend,
                                              model, dim, workers))
            .embed(masked);
      },
      py::arg("masked_corpus"), py::arg("model") = std::string(embed::kDefaultModel),
      py::arg("backend") = "stub", py::arg("dim") = embed::kStubDim, py::arg("workers") = 1);

  m.def(
      "mask_and_embed",
      [](const py::list& items, const std::string& model, const std::string& ner_backend,
         const std::string& embed_backend, std::size_t dim, unsigned workers) {
        const pipeline::Pipeline p(make_config(ner_backend, std::string(ner::kDefaultNerModel),
                                               embed_backend, model, dim, workers));
        // Annotated articles skip the tagger; plain articles run the whole chain.
        if (!items.empty() && py::isinstance<ner::AnnotatedArticle>(items[0])) {
          const auto annotated = items.cast<std::vector<ner::AnnotatedArticle>>();
          py::gil_scoped_release release;
          return p.embed(pipeline::Pipeline::mask(annotated));
        }
        const auto articles = articles_from(items);
        py::gil_scoped_release release;
        return p.mask_and_embed(articles);
      },
      py::arg("corpus"), py::arg("model") = std::string(embed::kDefaultModel),
      py::arg("ner_backend") = "stub", py::arg("embed_backend") = "stub",
      py::arg("dim") = embed::kStubDim, py::arg("workers") = 1);

  m.def(
      "find_nearest_neighbours",
      [](const embed::EmbeddingStore& queries, const embed::EmbeddingStore& corpus, std::size_t k) {
        py::gil_scoped_release release;
        auto nn = pipeline::find_nearest_neighbours(queries, corpus, k);
        return std::make_pair(std::move(nn.scores), std::move(nn.ids));
      },
      py::arg("query_embeddings"), py::arg("corpus_embeddings"), py::arg("k") = 1);

  m.def(
      "search_nearest_story",
      [](const py::iterable& queries, const std::string& ner_model, const std::string& model,
         const embed::EmbeddingStore& corpus_embed, std::size_t k, const std::string& ner_backend,
         const std::string& embed_backend) {
        const auto articles = articles_from(queries);
        std::vector<std::vector<index::SearchHit>> hits;
        {
          py::gil_scoped_release release;
          const pipeline::Pipeline p(
              make_config(ner_backend, ner_model, embed_backend, model, corpus_embed.dim(), 1));
          hits = p.search_nearest_story(articles, corpus_embed, k);
        }
        py::list out;
        for (const auto& row : hits) {
          py::list r;
          for (const auto& h : row) r.append(hit_dict(h));
          out.append(r);
        }
        return out;
      },
      py::arg("query_articles"), py::arg("ner_model") = std::string(ner::kDefaultNerModel),
      py::arg("model") = std::string(embed::kDefaultModel), py::kw_only(), py::arg("corpus_embed"),
      py::arg("k") = 1, py::arg("ner_backend") = "stub", py::arg("embed_backend") = "stub");

  m.def("f1_from_pr", &eval::f1_from_pr, py::arg("precision"), py::arg("recall"));
  m.def(
      "topic_match_rate_from_sheet",
      [](const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open " + path.string());
        const auto rows = eval::read_sheet_csv(in);
        return eval::topic_match_rate(eval::annotations_from_sheet(rows));
      },
      py::arg("path"));
}
