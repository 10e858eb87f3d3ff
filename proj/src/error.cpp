#include "nanonmr/error.hpp"

namespace nanonmr {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidGeometry: return "invalid-geometry";
        case ErrorKind::Singularity: return "singularity";
        case ErrorKind::Domain: return "domain";
        case ErrorKind::Accuracy: return "accuracy";
        case ErrorKind::ScanResolution: return "scan-resolution";
        case ErrorKind::UndefinedRatio: return "undefined-ratio";
        case ErrorKind::GridCoverage: return "grid-coverage";
        case ErrorKind::FitFailure: return "fit-failure";
        case ErrorKind::ConfigSyntax: return "config-syntax";
        case ErrorKind::ConfigSemantic: return "config-semantic";
        case ErrorKind::ConfigUnits: return "config-units";
        case ErrorKind::Io: return "io";
        case ErrorKind::Series: return "series";
    }
    return "unknown";
}

}  // namespace nanonmr
