#pragma once

#include <stdexcept>
#include <string>

namespace pla {

enum class Errc {
    // trees
    EmptyTree,
    MultipleRoots,
    Cycle,
    DanglingParent,
    InvalidId,
    BadConfig,
    // logic
    SyntaxError,
    UnknownSymbol,
    ArityMismatch,
    RebindingBoundVar,
    UnboundVariable,
    SignatureMismatch,
    BadParameters,
    // closure types
    TooManyVariables,
    NotDecomposable,
    // networks
    CyclicDependency,
    IllegalSymbolInTheta,
    TooLarge,
    NotZeroOne,
    // elimination
    NotClosureBasic,
    UnsatisfiablePair,
    PositivityUnknown,
    UnsupportedAggregation,
    CatalogOverflow,
    // harness
    DanglingNode,
    BadInput,
};

const char* errc_name(Errc c);

struct Error : std::runtime_error {
    Errc code;
    Error(Errc c, const std::string& msg)
        : std::runtime_error(std::string(errc_name(c)) + ": " + msg), code(c) {}
};

[[noreturn]] inline void fail(Errc c, const std::string& msg) { throw Error(c, msg); }

inline const char* errc_name(Errc c) {
    switch (c) {
    case Errc::EmptyTree: return "EmptyTree";
    case Errc::MultipleRoots: return "MultipleRoots";
    case Errc::Cycle: return "Cycle";
    case Errc::DanglingParent: return "DanglingParent";
    case Errc::InvalidId: return "InvalidId";
    case Errc::BadConfig: return "BadConfig";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::UnknownSymbol: return "UnknownSymbol";
    case Errc::ArityMismatch: return "ArityMismatch";
    case Errc::RebindingBoundVar: return "RebindingBoundVar";
    case Errc::UnboundVariable: return "UnboundVariable";
    case Errc::SignatureMismatch: return "SignatureMismatch";
    case Errc::BadParameters: return "BadParameters";
    case Errc::TooManyVariables: return "TooManyVariables";
    case Errc::NotDecomposable: return "NotDecomposable";
    case Errc::CyclicDependency: return "CyclicDependency";
    case Errc::IllegalSymbolInTheta: return "IllegalSymbolInTheta";
    case Errc::TooLarge: return "TooLarge";
    case Errc::NotZeroOne: return "NotZeroOne";
    case Errc::NotClosureBasic: return "NotClosureBasic";
    case Errc::UnsatisfiablePair: return "UnsatisfiablePair";
    case Errc::PositivityUnknown: return "PositivityUnknown";
    case Errc::UnsupportedAggregation: return "UnsupportedAggregation";
    case Errc::CatalogOverflow: return "CatalogOverflow";
    case Errc::DanglingNode: return "DanglingNode";
    case Errc::BadInput: return "BadInput";
    }
    return "Error";
}

} // namespace pla
