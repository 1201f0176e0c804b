#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "icstrace/hex.hpp"
#include "icstrace/rng.hpp"
#include "icstrace/s7_protocol.hpp"
#include "token_grammar.hpp"

using namespace icstrace;
using s7::Bytes;

namespace {

Bytes from_hex(std::string text) {
    std::erase(text, ' ');
    auto bytes = hex_decode(text);
    REQUIRE(bytes);
    return *bytes;
}

} // namespace

TEST_SUITE("tpkt") {
    TEST_CASE("decodes a frame with payload") {
        auto parsed = s7::parse_tpkt(from_hex("03000007aabbcc"));
        CHECK(parsed.frame.version == 3);
        CHECK(parsed.frame.length == 7);
        CHECK(parsed.frame.payload == from_hex("aabbcc"));
        CHECK(parsed.consumed == 7);
    }

    TEST_CASE("decodes the minimal frame") {
        auto parsed = s7::parse_tpkt(from_hex("03000004"));
        CHECK(parsed.frame.length == 4);
        CHECK(parsed.frame.payload.empty());
    }

    TEST_CASE("rejects a bad version") {
        CHECK_THROWS_AS(s7::parse_tpkt(from_hex("04000007aabbcc")), Error);
        try {
            s7::parse_tpkt(from_hex("04000007aabbcc"));
        } catch (const Error& e) {
            CHECK(e.code() == errc::bad_version);
        }
    }

    TEST_CASE("rejects truncation") {
        try {
            s7::parse_tpkt(from_hex("03000007aa"));
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.code() == errc::truncated_frame);
        }
        CHECK_THROWS_AS(s7::parse_tpkt(from_hex("0300")), Error);
    }

    TEST_CASE("pipelined frames parse into exactly N frames") {
        Rng rng(7);
        for (int trial = 0; trial < 50; ++trial) {
            std::size_t n = 1 + rng.bounded(6);
            Bytes stream;
            for (std::size_t i = 0; i < n; ++i) {
                auto set = token_grammar::sample_token_set(rng);
                auto frame = s7::serialize_request(set.token, set.params);
                stream.insert(stream.end(), frame.begin(), frame.end());
            }
            auto frames = s7::parse_tpkt_stream(stream);
            CHECK(frames.size() == n);
        }
    }
}

TEST_SUITE("cotp") {
    TEST_CASE("data pdu") {
        auto pdu = s7::parse_cotp(from_hex("02f080deadbeef"));
        CHECK(pdu.header_length == 2);
        CHECK(pdu.pdu_type == 0xF0);
        CHECK(pdu.variable_part == from_hex("80"));
        CHECK(pdu.payload == from_hex("deadbeef"));
        CHECK(pdu.is_data());
    }

    TEST_CASE("connection request with 17-byte header consumes the variable part") {
        // len=0x11, type=0xE0, then dst-ref/src-ref/class + variable TLVs
        auto pdu = s7::parse_cotp(from_hex("11e00000000100c0010ac1020100c2020102"));
        CHECK(pdu.pdu_type == 0xE0);
        CHECK(pdu.payload.empty());
        CHECK(pdu.variable_part.size() == 16);
    }

    TEST_CASE("truncated") {
        try {
            s7::parse_cotp(from_hex("02"));
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.code() == errc::truncated_pdu);
        }
    }

    TEST_CASE("unknown pdu type still parses") {
        auto pdu = s7::parse_cotp(from_hex("028080aa"));
        CHECK_FALSE(pdu.known_type());
    }
}

TEST_SUITE("s7 pdu") {
    TEST_CASE("job request header fields") {
        auto pdu = s7::parse_s7(from_hex("3201000000010001 0000 f0"));
        CHECK(pdu.magic == 0x32);
        CHECK(pdu.s7_type == 1);
        CHECK(pdu.data_unit_ref == 1);
        CHECK(pdu.param_length == 1);
        CHECK(pdu.data_length == 0);
        CHECK(pdu.parameters == from_hex("f0"));
    }

    TEST_CASE("bad magic") {
        try {
            s7::parse_s7(from_hex("31010000000100010000f0"));
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.code() == errc::bad_magic);
        }
    }

    TEST_CASE("parameters begin with the function code") {
        auto pdu = s7::parse_s7(from_hex("320100000001000500000401120a10"));
        CHECK(pdu.param_length == 5);
        CHECK(pdu.parameters[0] == 0x04);
        CHECK(s7::function_name(pdu.parameters[0]) == "Read");
    }

    TEST_CASE("length fields exceeding the buffer are truncation") {
        try {
            s7::parse_s7(from_hex("32010000000100050000 04"));
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.code() == errc::truncated_pdu);
        }
    }
}

TEST_SUITE("function tokens") {
    TEST_CASE("communication setup") {
        s7::S7Pdu pdu;
        pdu.parameters = from_hex("f0000001000101e0");
        auto token = s7::extract_function_token(pdu);
        CHECK(token.function_code == 0xF0);
        CHECK_FALSE(token.group.has_value());
        CHECK(token.known);
        CHECK(s7::function_name(token.function_code) == "Communication Setup");
    }

    TEST_CASE("read szl and read clock") {
        s7::S7Pdu pdu;
        pdu.parameters = from_hex("0001120411440100");  // group 4, sub 1
        auto token = s7::extract_function_token(pdu);
        CHECK(token.function_code == 0x00);
        CHECK(token.group == 4);
        CHECK(token.subfunction == 1);
        CHECK(s7::subfunction_name(*token.group, *token.subfunction) == "Read SZL");

        pdu.parameters = from_hex("0001120411470100");  // group 7, sub 1
        token = s7::extract_function_token(pdu);
        CHECK(s7::subfunction_name(*token.group, *token.subfunction) == "Read clock");
        CHECK(token.symbol() == "00/7/1");
    }

    TEST_CASE("empty parameters") {
        s7::S7Pdu pdu;
        try {
            s7::extract_function_token(pdu);
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.code() == errc::empty_parameters);
        }
    }

    TEST_CASE("unknown code is flagged, not dropped") {
        s7::S7Pdu pdu;
        pdu.parameters = from_hex("99");
        auto token = s7::extract_function_token(pdu);
        CHECK(token.function_code == 0x99);
        CHECK_FALSE(token.known);
        CHECK(s7::function_name(0x99) == "UNKNOWN");
        CHECK(token.symbol() == "99");
    }
}

TEST_SUITE("tables") {
    TEST_CASE("function-code table is exhaustive") {
        for (std::uint8_t code : s7::known_function_codes()) CHECK(s7::function_name(code) != "UNKNOWN");
        CHECK(s7::known_function_codes().size() == 12);
        CHECK(s7::function_name(0x04) == "Read");
        CHECK(s7::function_name(0x05) == "Write");
        CHECK(s7::function_name(0x1d) == "Download Start");
        CHECK(s7::function_name(0xf0) == "Communication Setup");
        CHECK(s7::function_name(0x03) == "UNKNOWN");
    }

    TEST_CASE("system-function table is exhaustive") {
        for (auto [group, sub] : s7::known_system_functions()) {
            CHECK(s7::function_group_name(group) != "UNKNOWN");
            CHECK(s7::subfunction_name(group, sub) != "UNKNOWN");
        }
        CHECK(s7::subfunction_name(4, 1) == "Read SZL");
        CHECK(s7::subfunction_name(3, 1) == "List blocks");
        CHECK(s7::subfunction_name(7, 2) == "Set clock");
        CHECK(s7::subfunction_name(7, 3) == "Set clock");
        CHECK(s7::subfunction_name(7, 4) == "Read clock (following)");
        CHECK(s7::function_group_name(6) == "PBC BSEND/BRECV");
        CHECK(s7::subfunction_name(6, 0) == "None");
        CHECK(s7::subfunction_name(4, 9) == "UNKNOWN");
        CHECK(s7::function_group_name(9) == "UNKNOWN");
    }
}

TEST_SUITE("parameter tokens") {
    TEST_CASE("read szl request tokens") {
        auto frame = s7::serialize_request(s7::FunctionToken{0x00, 4, 1, true},
                                           {s7::param_token("GRP:4"), s7::param_token("SUB:1"),
                                            s7::param_token("SZL:001c")});
        auto tokens = s7::extract_request_tokens(frame);
        REQUIRE(tokens.function.has_value());
        REQUIRE(tokens.params.size() == 3);
        CHECK(tokens.params[0].text == "GRP:4");
        CHECK(tokens.params[1].text == "SUB:1");
        CHECK(tokens.params[2].text == "SZL:001c");
    }

    TEST_CASE("communication setup fixed layout") {
        auto frame = s7::serialize_request(
            s7::FunctionToken{0xf0, {}, {}, true},
            {s7::param_token("PDUREF:00"), s7::param_token("MAXAMQ_CALLER:0001"),
             s7::param_token("MAXAMQ_CALLEE:0001"), s7::param_token("PDU_SIZE:01e0")});
        auto tokens = s7::extract_request_tokens(frame);
        REQUIRE(tokens.params.size() == 4);
        CHECK(tokens.params[3].text == "PDU_SIZE:01e0");
    }

    TEST_CASE("identical bytes yield identical token lists") {
        Rng rng(11);
        for (int i = 0; i < 100; ++i) {
            auto set = token_grammar::sample_token_set(rng);
            auto frame = s7::serialize_request(set.token, set.params);
            auto first = s7::extract_request_tokens(frame);
            auto second = s7::extract_request_tokens(frame);
            CHECK(first.params == second.params);
            CHECK(first.function == second.function);
        }
    }

    TEST_CASE("unparseable tail collapses into one OPAQUE token") {
        s7::S7Pdu pdu;
        pdu.parameters = from_hex("04" "02" "ff00000000000000000000");  // bad item marker
        auto tokens = s7::extract_parameter_tokens(pdu);
        REQUIRE(tokens.size() == 1);
        CHECK(tokens[0].text.rfind("OPAQUE:", 0) == 0);
    }
}

TEST_SUITE("serialization") {
    TEST_CASE("bare setup round-trips") {
        auto frame = s7::serialize_request(s7::FunctionToken{0xf0, {}, {}, true}, {});
        auto tokens = s7::extract_request_tokens(frame);
        REQUIRE(tokens.function.has_value());
        CHECK(tokens.function->function_code == 0xF0);
        CHECK(tokens.params.empty());
    }

    TEST_CASE("list blocks round-trips") {
        token_grammar::TokenSet set;
        set.token = s7::FunctionToken{0x00, 3, 1, true};
        set.params = {s7::param_token("GRP:3"), s7::param_token("SUB:1")};
        CHECK(token_grammar::round_trips(set));
    }

    TEST_CASE("fuzzed token sets round-trip") {
        Rng rng(42);
        for (int i = 0; i < 1000; ++i) {
            auto set = token_grammar::sample_token_set(rng);
            CAPTURE(set.token.function_code);
            CHECK(token_grammar::round_trips(set));
        }
    }

    TEST_CASE("unsupported functions are rejected") {
        CHECK_THROWS_AS(s7::serialize_request(s7::FunctionToken{0x99, {}, {}, false}, {}), Error);
        CHECK_THROWS_AS(s7::serialize_request(s7::FunctionToken{0x00, 9, 9, false}, {}), Error);
        CHECK_THROWS_AS(
            s7::serialize_request(s7::FunctionToken{0x1b, {}, {}, true},
                                  {s7::param_token("SZL:0011")}),
            Error);
    }
}

TEST_SUITE("validity") {
    TEST_CASE("serialized requests are valid") {
        Rng rng(3);
        for (int i = 0; i < 200; ++i) {
            auto set = token_grammar::sample_token_set(rng);
            auto frame = s7::serialize_request(set.token, set.params);
            auto v = s7::classify_payload(frame);
            CHECK(v.valid);
            CHECK(v.reason == s7::ValidityReason::ok);
        }
    }

    TEST_CASE("cotp connection request carries no s7 body") {
        auto v = s7::classify_payload(from_hex("0300001611e00000000100c0010ac1020100c2020102"));
        CHECK_FALSE(v.valid);
        CHECK(v.reason == s7::ValidityReason::no_s7_payload);
    }

    TEST_CASE("classification is total over random bytes") {
        Rng rng(99);
        for (int i = 0; i < 2000; ++i) {
            Bytes junk(rng.bounded(64), 0);
            for (auto& b : junk) b = static_cast<std::uint8_t>(rng.bounded(256));
            auto v = s7::classify_payload(junk);  // must not throw
            CHECK((v.valid || v.reason != s7::ValidityReason::ok));
        }
    }

    TEST_CASE("reason codes") {
        CHECK(s7::classify_payload(from_hex("04000004")).reason == s7::ValidityReason::bad_version);
        CHECK(s7::classify_payload(from_hex("0300")).reason == s7::ValidityReason::truncated_frame);
        CHECK(s7::classify_payload(from_hex("0300000702f080")).reason ==
              s7::ValidityReason::truncated_pdu);
        auto setup = s7::serialize_request(s7::FunctionToken{0xf0, {}, {}, true}, {});
        setup[7] = 0x31;
        CHECK(s7::classify_payload(setup).reason == s7::ValidityReason::bad_magic);
        // two frames in one record: pipelining is a stream-level concern
        Bytes both = s7::serialize_request(s7::FunctionToken{0xf0, {}, {}, true}, {});
        both.insert(both.end(), both.begin(), both.end());
        CHECK(s7::classify_payload(both).reason == s7::ValidityReason::trailing_bytes);
    }
}
