#pragma once

#include <stdexcept>
#include <string>

namespace dagnet {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Graph construction / validation failures.
struct CycleDetected : Error {
    using Error::Error;
};
struct InvalidGraph : Error {
    using Error::Error;
};

// Topology queries outside their domain.
struct NotABottleneck : Error {
    using Error::Error;
};

// Exhaustive enumeration past its configured cap.
struct TooLarge : Error {
    using Error::Error;
};

// Flow problem with inconsistent bounds or structure.
struct MalformedProblem : Error {
    using Error::Error;
};

// Logistic targets outside {0,1}, dimension mismatches, bad config values.
struct InvalidTarget : Error {
    using Error::Error;
};
struct InvalidArgument : Error {
    using Error::Error;
};

// Training loss became non-finite.
struct DivergenceDetected : Error {
    using Error::Error;
};

// File / JSON / CSV ingestion failure; message carries location context.
struct ParseError : Error {
    using Error::Error;
};

}  // namespace dagnet
