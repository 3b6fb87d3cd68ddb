#pragma once

// Error taxonomy shared by the library and the command line tool.
// Codes are grouped by the process exit code they map to:
//   config (2): the request itself is malformed
//   data   (3): inputs violate an invariant (messages name the offending row)
//   degen  (4): the statistic is undefined on otherwise valid input

#include <stdexcept>
#include <string>

namespace taukit {

enum class errc {
    // config
    invalid_argument,
    non_positive_arguments,
    non_increasing_cutpoints,
    k_too_large,
    rule_not_permutable,
    // data
    parse_error,
    missing_column,
    non_finite_coordinate,
    duplicate_id,
    fewer_than_two_cases,
    unknown_person_id,
    episode_outside_enrollment,
    overlapping_episodes,
    too_few_pairs,
    // numeric degeneracy
    global_odds_undefined,
    global_prevalence_undefined,
    global_rate_undefined,
    too_few_replicates,
    insufficient_replicates,
    all_censored,
    no_crossing,
    nothing_to_plot,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::invalid_argument:           return "InvalidArgument";
        case errc::non_positive_arguments:     return "NonPositiveArguments";
        case errc::non_increasing_cutpoints:   return "NonIncreasingCutpoints";
        case errc::k_too_large:                return "KTooLarge";
        case errc::rule_not_permutable:        return "RuleNotPermutable";
        case errc::parse_error:                return "ParseError";
        case errc::missing_column:             return "MissingColumn";
        case errc::non_finite_coordinate:      return "NonFiniteCoordinate";
        case errc::duplicate_id:               return "DuplicateId";
        case errc::fewer_than_two_cases:       return "FewerThanTwoCases";
        case errc::unknown_person_id:          return "UnknownPersonId";
        case errc::episode_outside_enrollment: return "EpisodeOutsideEnrollment";
        case errc::overlapping_episodes:       return "OverlappingEpisodes";
        case errc::too_few_pairs:              return "TooFewPairs";
        case errc::global_odds_undefined:      return "GlobalOddsUndefined";
        case errc::global_prevalence_undefined:return "GlobalPrevalenceUndefined";
        case errc::global_rate_undefined:      return "GlobalRateUndefined";
        case errc::too_few_replicates:         return "TooFewReplicates";
        case errc::insufficient_replicates:    return "InsufficientReplicates";
        case errc::all_censored:               return "AllCensored";
        case errc::no_crossing:                return "NoCrossing";
        case errc::nothing_to_plot:            return "NothingToPlot";
    }
    return "Unknown";
}

// Exit code class for a code (see tool contract).
inline int errc_exit_code(errc c) {
    switch (c) {
        case errc::invalid_argument:
        case errc::non_positive_arguments:
        case errc::non_increasing_cutpoints:
        case errc::k_too_large:
        case errc::rule_not_permutable:
            return 2;
        case errc::parse_error:
        case errc::missing_column:
        case errc::non_finite_coordinate:
        case errc::duplicate_id:
        case errc::fewer_than_two_cases:
        case errc::unknown_person_id:
        case errc::episode_outside_enrollment:
        case errc::overlapping_episodes:
        case errc::too_few_pairs:
            return 3;
        default:
            return 4;
    }
}

class tau_error : public std::runtime_error {
public:
    tau_error(errc code, std::string msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
    errc code() const { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& msg) {
    throw tau_error(code, msg);
}

} // namespace taukit
