#pragma once

#include <stdexcept>
#include <string>

namespace ut {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define UT_DEFINE_ERROR(Name)                                        \
    class Name : public Error {                                      \
    public:                                                          \
        explicit Name(const std::string& msg) : Error(msg) {}        \
    }

// lti
UT_DEFINE_ERROR(DegreeZero);        // constant denominator, no poles to report
UT_DEFINE_ERROR(PoleOnAxis);        // frequency response evaluated on a pole
UT_DEFINE_ERROR(DelayNotClosable);  // rational feedback closure with dead time
UT_DEFINE_ERROR(BadTransferFunction);

// simulation
UT_DEFINE_ERROR(ImproperTf);        // numerator degree above denominator degree
UT_DEFINE_ERROR(UnknownPlant);
UT_DEFINE_ERROR(BadPlantSpec);
UT_DEFINE_ERROR(BadScenario);

// analysis
UT_DEFINE_ERROR(TooShort);          // not enough samples in the analysis window
UT_DEFINE_ERROR(OutOfRange);

// tuner
UT_DEFINE_ERROR(Unresponsive);      // no gain in the search range moves the plant
UT_DEFINE_ERROR(UnstablePlant);     // every responsive gain oscillates or diverges
UT_DEFINE_ERROR(NoOscillationFound); // integrator sweep hit its floor quietly
UT_DEFINE_ERROR(NoOscillation);      // relay-free ultimate search found no cycling
UT_DEFINE_ERROR(BudgetExceeded);     // experiment budget exhausted mid-campaign

// io / wire
UT_DEFINE_ERROR(SchemaError);
UT_DEFINE_ERROR(IoError);
UT_DEFINE_ERROR(ProtocolError);

#undef UT_DEFINE_ERROR

} // namespace ut
