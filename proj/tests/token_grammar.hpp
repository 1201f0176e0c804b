#pragma once

// Fuzz sampler over the supported request-token grammar: every token set it
// produces must survive serialize -> parse -> extract unchanged.

#include <string>
#include <vector>

#include "icstrace/rng.hpp"
#include "icstrace/s7_protocol.hpp"

namespace token_grammar {

using icstrace::Rng;
namespace s7 = icstrace::s7;

struct TokenSet {
    s7::FunctionToken token;
    std::vector<s7::ParamToken> params;
};

inline std::string random_hex(Rng& rng, std::size_t digits) {
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (std::size_t i = 0; i < digits; ++i) out.push_back(hex[rng.bounded(16)]);
    return out;
}

inline char random_alnum(Rng& rng) {
    static const char* chars = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";
    return chars[rng.bounded(62)];
}

inline TokenSet sample_token_set(Rng& rng) {
    auto codes = s7::known_function_codes();
    std::uint8_t code = codes[rng.bounded(codes.size())];
    TokenSet set;
    set.token.function_code = code;
    set.token.known = true;
    auto push = [&](std::string text) { set.params.push_back(s7::param_token(std::move(text))); };

    switch (code) {
        case 0xf0:
            if (rng.bounded(2)) {
                push("PDUREF:" + random_hex(rng, 2));
                push("MAXAMQ_CALLER:" + random_hex(rng, 4));
                push("MAXAMQ_CALLEE:" + random_hex(rng, 4));
                push("PDU_SIZE:" + random_hex(rng, 4));
            }
            break;
        case 0x04:
        case 0x05: {
            std::size_t items = rng.bounded(4);
            for (std::size_t i = 0; i < items; ++i) {
                push("XPORT:" + random_hex(rng, 2));
                push("AREA:" + random_hex(rng, 2));
            }
            break;
        }
        case 0x00: {
            auto pairs = s7::known_system_functions();
            auto [group, sub] = pairs[rng.bounded(pairs.size())];
            set.token.group = group;
            set.token.subfunction = sub;
            push("GRP:" + std::to_string(group));
            push("SUB:" + std::to_string(sub));
            if (group == 4 && sub == 1 && rng.bounded(2)) push("SZL:" + random_hex(rng, 4));
            else if (group == 3 && (sub == 2 || sub == 3) && rng.bounded(2))
                push(std::string("BLKTYPE:") + random_alnum(rng) + random_alnum(rng));
            else if (group == 5 && sub == 1) push(rng.bounded(2) ? "PWD:1" : "PWD:0");
            else if (group == 7 && (sub == 2 || sub == 3) && rng.bounded(2))
                push("CLK:" + random_hex(rng, 2));
            break;
        }
        case 0x1a:
        case 0x1d:
            if (rng.bounded(2)) {
                push(std::string("BLKTYPE:") + random_alnum(rng) + random_alnum(rng));
                push(std::string("DEST:") + "PAB"[rng.bounded(3)]);
            }
            break;
        case 0x28:
        case 0x29: {
            static const char* pis[] = {"P_PROGRAM", "_GARB", "_MODU", "RESTART"};
            static const char* args[] = {"C", "X1", "BLOCK9"};
            switch (rng.bounded(3)) {
                case 0: break;
                case 1: push(std::string("PI:") + pis[rng.bounded(4)]); break;
                default:
                    push(std::string("ARG:") + args[rng.bounded(3)]);
                    push(std::string("PI:") + pis[rng.bounded(4)]);
                    break;
            }
            break;
        }
        default:
            break;  // 0x1b, 0x1c, 0x1e, 0x1f take no parameter tokens
    }
    return set;
}

// serialize -> parse -> extract; true when the token set survives unchanged.
inline bool round_trips(const TokenSet& set) {
    auto frame = s7::serialize_request(set.token, set.params);
    auto tpkt = s7::parse_tpkt(frame);
    if (tpkt.consumed != frame.size()) return false;
    auto cotp = s7::parse_cotp(tpkt.frame.payload);
    if (!cotp.is_data()) return false;
    auto pdu = s7::parse_s7(cotp.payload);
    auto token = s7::extract_function_token(pdu);
    auto params = s7::extract_parameter_tokens(pdu);
    return token == set.token && params == set.params;
}

} // namespace token_grammar
