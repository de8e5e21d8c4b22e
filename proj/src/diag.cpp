#include "lmod/diag.hpp"

namespace lmod {

const char* errc_name(Errc c) {
    switch (c) {
        case Errc::UnterminatedString: return "UnterminatedString";
        case Errc::IllegalCharacter: return "IllegalCharacter";
        case Errc::NumberOverflow: return "NumberOverflow";
        case Errc::SyntaxError: return "SyntaxError";
        case Errc::DuplicateHeader: return "DuplicateHeader";
        case Errc::ClauseInSignature: return "ClauseInSignature";
        case Errc::UnknownTypeConstructor: return "UnknownTypeConstructor";
        case Errc::ArityMismatch: return "ArityMismatch";
        case Errc::ConflictingDeclaration: return "ConflictingDeclaration";
        case Errc::SignatureMismatch: return "SignatureMismatch";
        case Errc::UseonlyViolation: return "UseonlyViolation";
        case Errc::ExportdefViolation: return "ExportdefViolation";
        case Errc::TypeError: return "TypeError";
        case Errc::UnknownConstant: return "UnknownConstant";
        case Errc::ModuleNotFound: return "ModuleNotFound";
        case Errc::CyclicAccumulation: return "CyclicAccumulation";
        case Errc::HeadNotConstant: return "HeadNotConstant";
        case Errc::UnknownPredicate: return "UnknownPredicate";
        case Errc::DepthLimitExceeded: return "DepthLimitExceeded";
        case Errc::LocalConstantInGoal: return "LocalConstantInGoal";
        case Errc::MachineFault: return "MachineFault";
        case Errc::BadMagic: return "BadMagic";
        case Errc::UnsupportedVersion: return "UnsupportedVersion";
        case Errc::Truncated: return "Truncated";
        case Errc::IndexOutOfRange: return "IndexOutOfRange";
        case Errc::BadFormat: return "BadFormat";
        case Errc::RenamingDomainMismatch: return "RenamingDomainMismatch";
        case Errc::MergeClosedDefinition: return "MergeClosedDefinition";
        case Errc::MissingObjectFile: return "MissingObjectFile";
        case Errc::SignatureSkew: return "SignatureSkew";
    }
    return "Error";
}

std::string Error::render() const {
    std::string out;
    if (pos_.valid()) out += pos_.str() + ": ";
    out += "error: ";
    out += what();
    out += " [";
    out += errc_name(code_);
    out += "]";
    return out;
}

}  // namespace lmod
