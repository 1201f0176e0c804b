#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "icstrace/error.hpp"

// TPKT / COTP / S7comm framing: parsing, request serialization, and the
// tokenization of function codes and their parameters into the discrete
// symbols consumed by the feature extractor.
//
// All multi-byte integers are big-endian (ISO-on-TCP convention). Everything
// here is a pure function over byte strings; no shared state.

namespace icstrace::s7 {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

// ---------------------------------------------------------------------------
// Framing layers

struct TpktFrame {
    std::uint8_t version = 0;  // 3 for valid frames
    std::uint8_t reserved = 0;
    std::uint16_t length = 0;  // total frame length in bytes, header included
    Bytes payload;
};

struct TpktParse {
    TpktFrame frame;
    std::size_t consumed = 0;  // exactly frame.length; the rest belongs to pipelined frames
};

// Throws Error{truncated_frame} or Error{bad_version}.
TpktParse parse_tpkt(ByteView bytes);

// Parses a stream of back-to-back TPKT frames; throws if any frame is bad or
// residual bytes remain.
std::vector<TpktFrame> parse_tpkt_stream(ByteView bytes);

inline constexpr std::uint8_t kCotpConnectionRequest = 0xE0;
inline constexpr std::uint8_t kCotpConnectionConfirm = 0xD0;
inline constexpr std::uint8_t kCotpData = 0xF0;

struct CotpPdu {
    std::uint8_t header_length = 0;  // excludes the length octet itself
    std::uint8_t pdu_type = 0;
    Bytes variable_part;  // header bytes after the type octet
    Bytes payload;

    bool known_type() const {
        return pdu_type == kCotpConnectionRequest || pdu_type == kCotpConnectionConfirm ||
               pdu_type == kCotpData;
    }
    bool is_data() const { return pdu_type == kCotpData; }
};

// Throws Error{truncated_pdu}. Unknown pdu types parse fine (warn-level
// condition); callers classify via known_type().
CotpPdu parse_cotp(ByteView bytes);

inline constexpr std::uint8_t kS7Magic = 0x32;
inline constexpr std::uint8_t kS7JobRequest = 0x01;
inline constexpr std::uint8_t kS7AckData = 0x03;

struct S7Pdu {
    std::uint8_t magic = 0;  // always 0x32
    std::uint8_t s7_type = 0;
    std::uint16_t reserved = 0;
    std::uint16_t data_unit_ref = 0;
    std::uint16_t param_length = 0;
    std::uint16_t data_length = 0;
    std::uint16_t result_info = 0;  // acknowledge-data only
    Bytes parameters;
    Bytes data;
};

// Throws Error{bad_magic} or Error{truncated_pdu}.
S7Pdu parse_s7(ByteView bytes);

// ---------------------------------------------------------------------------
// Function codes and system-function groups

struct FunctionToken {
    std::uint8_t function_code = 0;
    std::optional<std::uint8_t> group;        // 1..7, present iff function_code == 0x00
    std::optional<std::uint8_t> subfunction;  // present iff function_code == 0x00
    bool known = true;  // false when outside the known code/subfunction inventory

    bool operator==(const FunctionToken&) const = default;

    // FCS alphabet symbol: "f0", "04", ... and "00/4/1" for system functions.
    std::string symbol() const;
};

// First parameter byte selects the function; system functions (0x00) carry the
// group nibble and subfunction octet deeper in the parameter block.
// Throws Error{empty_parameters} or Error{truncated_pdu}; an unknown code
// still yields a token with known == false.
FunctionToken extract_function_token(const S7Pdu& pdu);

// "Read", "Communication Setup", ..., or "UNKNOWN".
std::string_view function_name(std::uint8_t code);
// "CPU Function", "Time Function", ..., or "UNKNOWN".
std::string_view function_group_name(std::uint8_t group);
// "Read SZL", "Set clock", "None" (PBC), ..., or "UNKNOWN".
std::string_view subfunction_name(std::uint8_t group, std::uint8_t subfunction);

// The full inventories of named function codes and (group, subfunction)
// pairs, for exhaustiveness checks and fuzzers.
std::span<const std::uint8_t> known_function_codes();
std::span<const std::pair<std::uint8_t, std::uint8_t>> known_system_functions();

// ---------------------------------------------------------------------------
// Parameter tokens

// Canonical "KIND:value" identifier of one parameter value. Equal bytes yield
// equal tokens; order within a request follows byte order.
struct ParamToken {
    std::string text;

    auto operator<=>(const ParamToken&) const = default;
};

inline ParamToken param_token(std::string text) { return ParamToken{std::move(text)}; }

// Per-function-code schema mapping parameter (and, for system functions,
// data-section) bytes to typed tokens. Unrecognized layouts collapse into one
// OPAQUE:<hex> token. Never throws; deterministic.
std::vector<ParamToken> extract_parameter_tokens(const S7Pdu& pdu);

// Builds a full TPKT|COTP-data|S7 job-request frame realizing the token and
// its parameter tokens. Inverse of the parse+extract chain for every token
// set in the supported grammar. Throws Error{unsupported_function} when the
// token or parameter list is outside the grammar.
Bytes serialize_request(const FunctionToken& token, const std::vector<ParamToken>& params);

// ---------------------------------------------------------------------------
// Validity classification (total over arbitrary byte strings)

enum class ValidityReason {
    ok,
    truncated_frame,
    bad_version,
    trailing_bytes,
    truncated_pdu,
    unknown_pdu_type,
    no_s7_payload,  // COTP connection request/confirm: legal transport, no S7comm body
    bad_magic,
};

const char* to_string(ValidityReason reason);

struct Validity {
    bool valid = false;
    ValidityReason reason = ValidityReason::truncated_frame;
};

// A request is valid iff it parses through TPKT -> COTP(data) -> S7 with
// magic 0x32. Never throws.
Validity classify_payload(ByteView bytes);

// Tokens of one request payload; empty when the payload is invalid or the
// request carries no parameters. Never throws.
struct RequestTokens {
    std::optional<FunctionToken> function;
    std::vector<ParamToken> params;
};

RequestTokens extract_request_tokens(ByteView bytes);

} // namespace icstrace::s7
