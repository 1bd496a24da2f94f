#pragma once

#include <stdexcept>
#include <string>

namespace ndv {

// Root of every error this library raises. Each concrete type names one
// failure mode so callers (CLI, service, bindings) can map it precisely.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define NDV_DEFINE_ERROR(Name, Base)    \
  class Name : public Base {            \
   public:                              \
    using Base::Base;                   \
  };

// corpus
NDV_DEFINE_ERROR(SpecParseError, Error)
NDV_DEFINE_ERROR(IoError, Error)
NDV_DEFINE_ERROR(ManifestError, Error)
NDV_DEFINE_ERROR(ManifestVersionError, ManifestError)
NDV_DEFINE_ERROR(RecordError, Error)
NDV_DEFINE_ERROR(MissingField, RecordError)
NDV_DEFINE_ERROR(BadDate, RecordError)
NDV_DEFINE_ERROR(EmptyText, RecordError)
NDV_DEFINE_ERROR(CorruptFileError, Error)

// nermask
NDV_DEFINE_ERROR(AnnotationError, Error)
NDV_DEFINE_ERROR(SpanOverlapError, Error)
NDV_DEFINE_ERROR(SpanBoundsError, Error)

// backends
NDV_DEFINE_ERROR(BackendUnavailable, Error)
NDV_DEFINE_ERROR(ProtocolError, Error)

// embed
NDV_DEFINE_ERROR(ZeroVectorError, Error)
NDV_DEFINE_ERROR(FormatError, Error)
NDV_DEFINE_ERROR(CorruptStoreError, Error)
NDV_DEFINE_ERROR(InvariantError, Error)

// index
NDV_DEFINE_ERROR(DimMismatchError, Error)
NDV_DEFINE_ERROR(DuplicateIdError, Error)
NDV_DEFINE_ERROR(EmptyIndex, Error)
NDV_DEFINE_ERROR(BadK, Error)
NDV_DEFINE_ERROR(UnknownId, Error)

// evalkit
NDV_DEFINE_ERROR(DomainError, Error)
NDV_DEFINE_ERROR(ShapeError, Error)
NDV_DEFINE_ERROR(NoNegativeAvailable, Error)
NDV_DEFINE_ERROR(EmptyAnnotationError, Error)

#undef NDV_DEFINE_ERROR

// Raised by the pipeline when a stage fails; keeps the stage name and the
// offending article id next to the underlying message.
class StageError : public Error {
 public:
  StageError(std::string stage, std::string article_id, const std::string& what,
             bool backend_down)
      : Error(stage + " failed" + (article_id.empty() ? "" : " on article '" + article_id + "'") +
              ": " + what),
        stage_(std::move(stage)),
        article_id_(std::move(article_id)),
        backend_down_(backend_down) {}

  const std::string& stage() const noexcept { return stage_; }
  const std::string& article_id() const noexcept { return article_id_; }
  // True when the root cause was BackendUnavailable.
  bool backend_down() const noexcept { return backend_down_; }

 private:
  std::string stage_;
  std::string article_id_;
  bool backend_down_;
};

}  // namespace ndv
