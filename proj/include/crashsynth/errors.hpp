#pragma once

#include <stdexcept>
#include <string>

namespace crashsynth {

// Base class for all recoverable pipeline errors. Subclasses carry a stable
// code string so CLI output and tests can match on the failure kind without
// parsing prose.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// Structurally invalid input document (missing keys, wrong types).
struct SchemaError : Error {
  explicit SchemaError(const std::string& m) : Error("SchemaError", m) {}
};

// Well-formed document with inconsistent content (bad ranges, dangling ids).
struct SemanticError : Error {
  explicit SemanticError(const std::string& m) : Error("SemanticError", m) {}
};

struct UnknownAction : Error {
  explicit UnknownAction(const std::string& m) : Error("UnknownAction", m) {}
};

// An extraction response had no usable structure even after one reprompt.
struct ParseError : Error {
  explicit ParseError(const std::string& m) : Error("ParseError", m) {}
};

// Transport-level extraction failure (endpoint unreachable, HTTP error).
struct ClientError : Error {
  explicit ClientError(const std::string& m) : Error("ClientError", m) {}
};

struct GeometryError : Error {
  explicit GeometryError(const std::string& m) : Error("GeometryError", m) {}
};

// Road network connectivity is missing a successor the catalog needs.
struct ConnectivityError : Error {
  explicit ConnectivityError(const std::string& m) : Error("ConnectivityError", m) {}
};

// The abstract's compass directions cannot be assigned to the site's legs
// while preserving pairwise orientation (same / opposing / perpendicular).
struct UnmappableDirections : Error {
  explicit UnmappableDirections(const std::string& m) : Error("UnmappableDirections", m) {}
};

// Striker and victim drivable areas do not overlap (or overlap below the
// minimum usable area), so no collision point exists at this site.
struct NoOverlap : Error {
  explicit NoOverlap(const std::string& m) : Error("NoOverlap", m) {}
};

struct DegenerateCollisionArea : Error {
  explicit DegenerateCollisionArea(const std::string& m) : Error("DegenerateCollisionArea", m) {}
};

// A constraint build step was asked for an action/site combination the
// catalog cannot express (e.g. a turn at a site without a junction).
struct UnsupportedAction : Error {
  explicit UnsupportedAction(const std::string& m) : Error("UnsupportedAction", m) {}
};

// No site in the map matches the abstract's road type and lane demand.
struct NoCandidateSite : Error {
  explicit NoCandidateSite(const std::string& m) : Error("NoCandidateSite", m) {}
};

// Every candidate site failed to produce a scenario; per-site reasons are
// kept in the planning report.
struct AllSitesInfeasible : Error {
  explicit AllSitesInfeasible(const std::string& m) : Error("AllSitesInfeasible", m) {}
};

// An aggregate (SRR, accuracy) was requested over zero inputs.
struct EmptyInput : Error {
  explicit EmptyInput(const std::string& m) : Error("EmptyInput", m) {}
};

// Paired evaluation inputs (extracted vs gold) differ in cardinality.
struct LengthMismatch : Error {
  explicit LengthMismatch(const std::string& m) : Error("LengthMismatch", m) {}
};

// A prompt was requested for an empty accident report.
struct EmptyReport : Error {
  explicit EmptyReport(const std::string& m) : Error("EmptyReport", m) {}
};

// Test-case replay input lacks the ego channel the oracle must score.
struct MissingEgoChannel : Error {
  explicit MissingEgoChannel(const std::string& m) : Error("MissingEgoChannel", m) {}
};

struct IoError : Error {
  explicit IoError(const std::string& m) : Error("IoError", m) {}
};

}  // namespace crashsynth
