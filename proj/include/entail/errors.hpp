#pragma once

#include <stdexcept>
#include <string>

namespace entail {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Proof text format.
class ProofFormatError : public Error {
  public:
    using Error::Error;
};
class SyntaxError : public ProofFormatError {
  public:
    using ProofFormatError::ProofFormatError;
};
class UnknownPremise : public ProofFormatError {
  public:
    using ProofFormatError::ProofFormatError;
};
class DuplicateConclusion : public ProofFormatError {
  public:
    using ProofFormatError::ProofFormatError;
};
class EmptyProof : public ProofFormatError {
  public:
    using ProofFormatError::ProofFormatError;
};

// Scores outside [0, 1].
class DomainError : public Error {
  public:
    using Error::Error;
};

// Proof graph.
class InvalidStep : public Error {
  public:
    using Error::Error;
};
class NoProof : public Error {
  public:
    using Error::Error;
};

// Step sources.
class ProverFailure : public Error {
  public:
    using Error::Error;
};
class VerifierFailure : public Error {
  public:
    using Error::Error;
};
class BridgeError : public Error {
  public:
    using Error::Error;
};
class BridgeTimeout : public BridgeError {
  public:
    using BridgeError::BridgeError;
};
class BridgeProtocolError : public BridgeError {
  public:
    using BridgeError::BridgeError;
};
class BridgeUnavailable : public BridgeError {
  public:
    using BridgeError::BridgeError;
};

// Data generation.
class ConfigError : public Error {
  public:
    using Error::Error;
};
class DepthUnreachable : public Error {
  public:
    using Error::Error;
};
class NotEnoughPremises : public Error {
  public:
    using Error::Error;
};
class EmptyCorpus : public Error {
  public:
    using Error::Error;
};

// Dataset / predictions files.
class DataError : public Error {
  public:
    using Error::Error;
};

}  // namespace entail
