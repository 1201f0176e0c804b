#include "icstrace/s7_protocol.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>

#include "icstrace/hex.hpp"

namespace icstrace::s7 {

namespace {

std::uint16_t read_be16(ByteView b, std::size_t off) {
    return static_cast<std::uint16_t>((b[off] << 8) | b[off + 1]);
}

void push_be16(Bytes& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

std::string hex2(std::uint8_t v) {
    char buf[3];
    std::snprintf(buf, sizeof buf, "%02x", v);
    return buf;
}

std::string hex4(std::uint16_t v) {
    char buf[5];
    std::snprintf(buf, sizeof buf, "%04x", v);
    return buf;
}

constexpr std::array<std::uint8_t, 12> kFunctionCodes = {
    0x00, 0x04, 0x05, 0x1a, 0x1b, 0x1c, 0x1d, 0x1e, 0x1f, 0x28, 0x29, 0xf0};

// (group, subfunction); group 6 has no subfunction, encoded as 0.
constexpr std::array<std::pair<std::uint8_t, std::uint8_t>, 14> kSystemFunctionPairs = {{
    {1, 1}, {1, 2}, {2, 1}, {3, 1}, {3, 2}, {3, 3}, {4, 1},
    {4, 2}, {5, 1}, {6, 0}, {7, 1}, {7, 2}, {7, 3}, {7, 4},
}};

bool is_known_system_function(std::uint8_t group, std::uint8_t sub) {
    return std::any_of(kSystemFunctionPairs.begin(), kSystemFunctionPairs.end(),
                       [&](auto p) { return p.first == group && p.second == sub; });
}

bool is_ascii_name_char(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

bool is_ascii_name(std::string_view s) {
    return !s.empty() && s.size() <= 16 &&
           std::all_of(s.begin(), s.end(), is_ascii_name_char);
}

// System-function parameter block offsets (public S7comm dissection layout):
// [0]=0x00 head, [1..2]=0x01 0x12, [3]=param length, [4]=method,
// [5]=type|group nibble, [6]=subfunction, [7]=sequence.
constexpr std::size_t kSysFnGroupOffset = 5;
constexpr std::size_t kSysFnSubOffset = 6;
constexpr std::size_t kSysFnParamSize = 8;

struct TokenView {
    std::string_view kind;
    std::string_view value;
};

TokenView split_token(const ParamToken& t) {
    auto pos = t.text.find(':');
    if (pos == std::string::npos) return {t.text, {}};
    return {std::string_view(t.text).substr(0, pos), std::string_view(t.text).substr(pos + 1)};
}

std::optional<std::uint64_t> parse_hex_value(std::string_view v, std::size_t digits) {
    if (v.size() != digits) return std::nullopt;
    std::uint64_t out = 0;
    for (char c : v) {
        int d;
        if (c >= '0' && c <= '9') d = c - '0';
        else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
        else return std::nullopt;
        out = (out << 4) | static_cast<std::uint64_t>(d);
    }
    return out;
}

void append_opaque(std::vector<ParamToken>& out, ByteView tail) {
    if (!tail.empty()) out.push_back(param_token("OPAQUE:" + hex_encode(tail)));
}

} // namespace

// ---------------------------------------------------------------------------
// Framing

TpktParse parse_tpkt(ByteView bytes) {
    if (bytes.size() < 4) throw Error(errc::truncated_frame, "need at least 4 bytes of TPKT header");
    TpktFrame frame;
    frame.version = bytes[0];
    frame.reserved = bytes[1];
    frame.length = read_be16(bytes, 2);
    if (frame.version != 3) throw Error(errc::bad_version, "TPKT version " + std::to_string(frame.version));
    if (frame.length < 4) throw Error(errc::truncated_frame, "TPKT length field smaller than header");
    if (bytes.size() < frame.length) throw Error(errc::truncated_frame, "frame shorter than TPKT length field");
    frame.payload.assign(bytes.begin() + 4, bytes.begin() + frame.length);
    return {std::move(frame), frame.length};
}

std::vector<TpktFrame> parse_tpkt_stream(ByteView bytes) {
    std::vector<TpktFrame> frames;
    while (!bytes.empty()) {
        auto parsed = parse_tpkt(bytes);
        bytes = bytes.subspan(parsed.consumed);
        frames.push_back(std::move(parsed.frame));
    }
    return frames;
}

CotpPdu parse_cotp(ByteView bytes) {
    if (bytes.size() < 2) throw Error(errc::truncated_pdu, "need at least 2 bytes of COTP header");
    CotpPdu pdu;
    pdu.header_length = bytes[0];
    if (pdu.header_length < 1) throw Error(errc::truncated_pdu, "COTP header length 0 leaves no type octet");
    if (bytes.size() < std::size_t(1) + pdu.header_length)
        throw Error(errc::truncated_pdu, "COTP header exceeds available bytes");
    pdu.pdu_type = bytes[1];
    pdu.variable_part.assign(bytes.begin() + 2, bytes.begin() + 1 + pdu.header_length);
    pdu.payload.assign(bytes.begin() + 1 + pdu.header_length, bytes.end());
    return pdu;
}

S7Pdu parse_s7(ByteView bytes) {
    if (bytes.size() < 10) throw Error(errc::truncated_pdu, "S7 header needs 10 bytes");
    if (bytes[0] != kS7Magic) throw Error(errc::bad_magic, "first byte 0x" + hex2(bytes[0]));
    S7Pdu pdu;
    pdu.magic = bytes[0];
    pdu.s7_type = bytes[1];
    pdu.reserved = read_be16(bytes, 2);
    pdu.data_unit_ref = read_be16(bytes, 4);
    pdu.param_length = read_be16(bytes, 6);
    pdu.data_length = read_be16(bytes, 8);
    std::size_t off = 10;
    if (pdu.s7_type == kS7AckData) {
        if (bytes.size() < 12) throw Error(errc::truncated_pdu, "acknowledge-data header needs 12 bytes");
        pdu.result_info = read_be16(bytes, 10);
        off = 12;
    }
    if (bytes.size() < off + pdu.param_length + pdu.data_length)
        throw Error(errc::truncated_pdu, "parameter/data lengths exceed available bytes");
    pdu.parameters.assign(bytes.begin() + off, bytes.begin() + off + pdu.param_length);
    pdu.data.assign(bytes.begin() + off + pdu.param_length,
                    bytes.begin() + off + pdu.param_length + pdu.data_length);
    return pdu;
}

// ---------------------------------------------------------------------------
// Function-code and subfunction name tables

std::string_view function_name(std::uint8_t code) {
    switch (code) {
        case 0x00: return "System Functions";
        case 0x04: return "Read";
        case 0x05: return "Write";
        case 0x1a: return "Request Download";
        case 0x1b: return "Download Block";
        case 0x1c: return "Download End";
        case 0x1d: return "Download Start";
        case 0x1e: return "Upload";
        case 0x1f: return "Upload End";
        case 0x28: return "PLC Control";
        case 0x29: return "PLC Stop";
        case 0xf0: return "Communication Setup";
        default: return "UNKNOWN";
    }
}

std::string_view function_group_name(std::uint8_t group) {
    switch (group) {
        case 1: return "Programmer Commands";
        case 2: return "Cyclic Data";
        case 3: return "Block Function";
        case 4: return "CPU Function";
        case 5: return "Security";
        case 6: return "PBC BSEND/BRECV";
        case 7: return "Time Function";
        default: return "UNKNOWN";
    }
}

std::string_view subfunction_name(std::uint8_t group, std::uint8_t subfunction) {
    switch (group) {
        case 1:
            if (subfunction == 1) return "Request diag data";
            if (subfunction == 2) return "VarTab";
            break;
        case 2:
            if (subfunction == 1) return "Memory";
            break;
        case 3:
            if (subfunction == 1) return "List blocks";
            if (subfunction == 2) return "List blocks of type";
            if (subfunction == 3) return "Get block info";
            break;
        case 4:
            if (subfunction == 1) return "Read SZL";
            if (subfunction == 2) return "Message service";
            break;
        case 5:
            if (subfunction == 1) return "PLC password";
            break;
        case 6:
            if (subfunction == 0) return "None";
            break;
        case 7:
            if (subfunction == 1) return "Read clock";
            if (subfunction == 2 || subfunction == 3) return "Set clock";
            if (subfunction == 4) return "Read clock (following)";
            break;
        default:
            break;
    }
    return "UNKNOWN";
}

std::span<const std::uint8_t> known_function_codes() { return kFunctionCodes; }

std::span<const std::pair<std::uint8_t, std::uint8_t>> known_system_functions() { return kSystemFunctionPairs; }

// ---------------------------------------------------------------------------
// Function token

std::string FunctionToken::symbol() const {
    if (function_code == 0x00 && group && subfunction) {
        return "00/" + std::to_string(*group) + "/" + std::to_string(*subfunction);
    }
    return hex2(function_code);
}

FunctionToken extract_function_token(const S7Pdu& pdu) {
    if (pdu.parameters.empty()) throw Error(errc::empty_parameters, "no parameter bytes");
    FunctionToken token;
    token.function_code = pdu.parameters[0];
    if (token.function_code == 0x00) {
        if (pdu.parameters.size() < kSysFnParamSize - 1)
            throw Error(errc::truncated_pdu, "system function parameter block truncated");
        token.group = pdu.parameters[kSysFnGroupOffset] & 0x0F;
        token.subfunction = pdu.parameters[kSysFnSubOffset];
        token.known = is_known_system_function(*token.group, *token.subfunction);
    } else {
        token.known = std::find(kFunctionCodes.begin(), kFunctionCodes.end(), token.function_code) !=
                      kFunctionCodes.end();
    }
    return token;
}

// ---------------------------------------------------------------------------
// Parameter tokens

namespace {

void extract_setup_tokens(ByteView tail, std::vector<ParamToken>& out) {
    if (tail.empty()) return;
    if (tail.size() < 7) {
        append_opaque(out, tail);
        return;
    }
    out.push_back(param_token("PDUREF:" + hex2(tail[0])));
    out.push_back(param_token("MAXAMQ_CALLER:" + hex4(read_be16(tail, 1))));
    out.push_back(param_token("MAXAMQ_CALLEE:" + hex4(read_be16(tail, 3))));
    out.push_back(param_token("PDU_SIZE:" + hex4(read_be16(tail, 5))));
    append_opaque(out, tail.subspan(7));
}

void extract_item_tokens(ByteView tail, std::vector<ParamToken>& out) {
    if (tail.empty()) return;
    std::size_t count = tail[0];
    std::size_t off = 1;
    for (std::size_t i = 0; i < count; ++i) {
        if (tail.size() < off + 12 || tail[off] != 0x12 || tail[off + 1] != 0x0A ||
            tail[off + 2] != 0x10) {
            append_opaque(out, tail.subspan(off));
            return;
        }
        out.push_back(param_token("XPORT:" + hex2(tail[off + 3])));
        out.push_back(param_token("AREA:" + hex2(tail[off + 8])));
        off += 12;
    }
    append_opaque(out, tail.subspan(off));
}

void extract_system_tokens(const S7Pdu& pdu, std::vector<ParamToken>& out) {
    ByteView params(pdu.parameters);
    if (params.size() < kSysFnParamSize - 1) {
        append_opaque(out, params.subspan(1));
        return;
    }
    std::uint8_t group = params[kSysFnGroupOffset] & 0x0F;
    std::uint8_t sub = params[kSysFnSubOffset];
    out.push_back(param_token("GRP:" + std::to_string(group)));
    out.push_back(param_token("SUB:" + std::to_string(sub)));
    if (params.size() > kSysFnParamSize) append_opaque(out, params.subspan(kSysFnParamSize));

    ByteView data(pdu.data);
    if (group == 5 && sub == 1) {
        // Password bytes are scrambled; only presence is a stable signal.
        out.push_back(param_token(data.empty() ? "PWD:0" : "PWD:1"));
        return;
    }
    if (data.empty()) return;
    if (group == 4 && sub == 1) {
        if (data.size() >= 6 && data[0] == 0xFF && data[1] == 0x09) {
            out.push_back(param_token("SZL:" + hex4(read_be16(data, 4))));
        } else {
            append_opaque(out, data);
        }
        return;
    }
    if (group == 3 && (sub == 2 || sub == 3)) {
        if (data.size() >= 6 && data[0] == 0xFF && data[1] == 0x09 && std::isalnum(data[4]) &&
            std::isalnum(data[5])) {
            out.push_back(param_token(std::string("BLKTYPE:") + char(data[4]) + char(data[5])));
        } else {
            append_opaque(out, data);
        }
        return;
    }
    if (group == 7 && (sub == 2 || sub == 3)) {
        if (data.size() >= 5 && data[0] == 0xFF) {
            out.push_back(param_token("CLK:" + hex2(data[4])));
        } else {
            append_opaque(out, data);
        }
        return;
    }
    append_opaque(out, data);
}

void extract_download_tokens(ByteView tail, std::vector<ParamToken>& out) {
    if (tail.empty()) return;
    bool wellformed = tail.size() == 9 && tail[0] == '_' && std::isalnum(tail[1]) &&
                      std::isalnum(tail[2]) &&
                      std::all_of(tail.begin() + 3, tail.begin() + 8,
                                  [](std::uint8_t c) { return c >= '0' && c <= '9'; }) &&
                      std::isupper(tail[8]);
    if (!wellformed) {
        append_opaque(out, tail);
        return;
    }
    out.push_back(param_token(std::string("BLKTYPE:") + char(tail[1]) + char(tail[2])));
    out.push_back(param_token(std::string("DEST:") + char(tail[8])));
}

void extract_pi_tokens(ByteView tail, std::vector<ParamToken>& out) {
    if (tail.empty()) return;
    if (tail.size() < 9) {
        append_opaque(out, tail);
        return;
    }
    std::size_t arg_len = tail[7];
    std::size_t pi_len_off = 8 + arg_len;
    if (tail.size() < pi_len_off + 1) {
        append_opaque(out, tail);
        return;
    }
    std::size_t pi_len = tail[pi_len_off];
    if (tail.size() != pi_len_off + 1 + pi_len) {
        append_opaque(out, tail);
        return;
    }
    std::string arg(tail.begin() + 8, tail.begin() + 8 + arg_len);
    std::string pi(tail.begin() + pi_len_off + 1, tail.end());
    if ((arg_len > 0 && !is_ascii_name(arg)) || (pi_len > 0 && !is_ascii_name(pi))) {
        append_opaque(out, tail);
        return;
    }
    if (arg_len > 0) out.push_back(param_token("ARG:" + arg));
    if (pi_len > 0) out.push_back(param_token("PI:" + pi));
}

} // namespace

std::vector<ParamToken> extract_parameter_tokens(const S7Pdu& pdu) {
    std::vector<ParamToken> out;
    if (pdu.parameters.empty()) return out;
    ByteView params(pdu.parameters);
    ByteView tail = params.subspan(1);
    switch (params[0]) {
        case 0xf0: extract_setup_tokens(tail, out); break;
        case 0x04:
        case 0x05: extract_item_tokens(tail, out); break;
        case 0x00: extract_system_tokens(pdu, out); break;
        case 0x1a:
        case 0x1d: extract_download_tokens(tail, out); break;
        case 0x28:
        case 0x29: extract_pi_tokens(tail, out); break;
        default: append_opaque(out, tail); break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

class TokenCursor {
public:
    explicit TokenCursor(const std::vector<ParamToken>& tokens) : tokens_(tokens) {}

    bool done() const { return pos_ == tokens_.size(); }

    std::optional<TokenView> peek() const {
        if (done()) return std::nullopt;
        return split_token(tokens_[pos_]);
    }

    TokenView take(std::string_view kind) {
        auto tv = peek();
        if (!tv || tv->kind != kind)
            throw Error(errc::unsupported_function,
                        "expected parameter token " + std::string(kind));
        ++pos_;
        return *tv;
    }

    void expect_done() const {
        if (!done())
            throw Error(errc::unsupported_function,
                        "unexpected parameter token " + tokens_[pos_].text);
    }

private:
    const std::vector<ParamToken>& tokens_;
    std::size_t pos_ = 0;
};

std::uint64_t take_hex(TokenCursor& cur, std::string_view kind, std::size_t digits) {
    auto tv = cur.take(kind);
    auto v = parse_hex_value(tv.value, digits);
    if (!v) throw Error(errc::unsupported_function, "bad value for " + std::string(kind));
    return *v;
}

void build_setup(TokenCursor& cur, Bytes& params) {
    params.push_back(0xf0);
    if (cur.done()) return;
    params.push_back(static_cast<std::uint8_t>(take_hex(cur, "PDUREF", 2)));
    push_be16(params, static_cast<std::uint16_t>(take_hex(cur, "MAXAMQ_CALLER", 4)));
    push_be16(params, static_cast<std::uint16_t>(take_hex(cur, "MAXAMQ_CALLEE", 4)));
    push_be16(params, static_cast<std::uint16_t>(take_hex(cur, "PDU_SIZE", 4)));
}

void build_items(std::uint8_t code, TokenCursor& cur, Bytes& params, Bytes& data) {
    params.push_back(code);
    std::size_t count_pos = params.size();
    params.push_back(0);
    std::size_t count = 0;
    while (!cur.done()) {
        auto xport = static_cast<std::uint8_t>(take_hex(cur, "XPORT", 2));
        auto area = static_cast<std::uint8_t>(take_hex(cur, "AREA", 2));
        // S7 "any" addressing item with canonical count/db/address.
        params.insert(params.end(), {0x12, 0x0A, 0x10, xport, 0x00, 0x01, 0x00, 0x01, area,
                                     0x00, 0x00, 0x00});
        ++count;
    }
    if (count > 0xFF) throw Error(errc::unsupported_function, "too many read/write items");
    params[count_pos] = static_cast<std::uint8_t>(count);
    if (code == 0x05) {
        for (std::size_t i = 0; i < count; ++i) {
            data.insert(data.end(), {0x00, 0x04, 0x00, 0x08, 0x00});
            if (i + 1 < count) data.push_back(0x00);  // pad to even offset
        }
    }
}

void build_system(const FunctionToken& token, TokenCursor& cur, Bytes& params, Bytes& data) {
    std::uint8_t group = *token.group;
    std::uint8_t sub = *token.subfunction;
    // Leading GRP/SUB tokens are optional but must match the function token.
    if (auto tv = cur.peek(); tv && tv->kind == "GRP") {
        auto grp_tv = cur.take("GRP");
        if (grp_tv.value != std::to_string(group))
            throw Error(errc::unsupported_function, "GRP token contradicts function token");
        auto sub_tv = cur.take("SUB");
        if (sub_tv.value != std::to_string(sub))
            throw Error(errc::unsupported_function, "SUB token contradicts function token");
    }
    params.insert(params.end(),
                  {0x00, 0x01, 0x12, 0x04, 0x11,
                   static_cast<std::uint8_t>(0x40 | group), sub, 0x00});
    if (group == 4 && sub == 1) {
        if (!cur.done()) {
            auto szl = static_cast<std::uint16_t>(take_hex(cur, "SZL", 4));
            data.insert(data.end(), {0xFF, 0x09, 0x00, 0x04});
            push_be16(data, szl);
            push_be16(data, 0x0000);
        }
        return;
    }
    if (group == 3 && (sub == 2 || sub == 3)) {
        if (!cur.done()) {
            auto tv = cur.take("BLKTYPE");
            if (tv.value.size() != 2 || !std::isalnum(tv.value[0]) || !std::isalnum(tv.value[1]))
                throw Error(errc::unsupported_function, "bad BLKTYPE value");
            data.insert(data.end(), {0xFF, 0x09, 0x00, 0x02,
                                     static_cast<std::uint8_t>(tv.value[0]),
                                     static_cast<std::uint8_t>(tv.value[1])});
        }
        return;
    }
    if (group == 5 && sub == 1) {
        auto tv = cur.take("PWD");
        if (tv.value == "1") {
            data.insert(data.end(), {0xFF, 0x09, 0x00, 0x08});
            data.insert(data.end(), 8, 0x5A);
        } else if (tv.value != "0") {
            throw Error(errc::unsupported_function, "PWD value must be 0 or 1");
        }
        return;
    }
    if (group == 7 && (sub == 2 || sub == 3)) {
        if (!cur.done()) {
            auto clk = static_cast<std::uint8_t>(take_hex(cur, "CLK", 2));
            data.insert(data.end(), {0xFF, 0x09, 0x00, 0x0A, clk});
            data.insert(data.end(), 9, 0x00);
        }
        return;
    }
}

void build_download(std::uint8_t code, TokenCursor& cur, Bytes& params) {
    params.push_back(code);
    if (cur.done()) return;
    auto type_tv = cur.take("BLKTYPE");
    auto dest_tv = cur.take("DEST");
    if (type_tv.value.size() != 2 || dest_tv.value.size() != 1 ||
        !std::isupper(dest_tv.value[0]) || !std::isalnum(type_tv.value[0]) ||
        !std::isalnum(type_tv.value[1]))
        throw Error(errc::unsupported_function, "bad block file tokens");
    params.push_back('_');
    params.push_back(static_cast<std::uint8_t>(type_tv.value[0]));
    params.push_back(static_cast<std::uint8_t>(type_tv.value[1]));
    for (char c : {'0', '0', '0', '0', '1'}) params.push_back(static_cast<std::uint8_t>(c));
    params.push_back(static_cast<std::uint8_t>(dest_tv.value[0]));
}

void build_pi(std::uint8_t code, TokenCursor& cur, Bytes& params) {
    params.push_back(code);
    if (cur.done()) return;
    std::string arg;
    if (cur.peek() && cur.peek()->kind == "ARG") {
        arg = std::string(cur.take("ARG").value);
        if (!is_ascii_name(arg)) throw Error(errc::unsupported_function, "bad ARG value");
    }
    auto pi = std::string(cur.take("PI").value);
    if (!is_ascii_name(pi)) throw Error(errc::unsupported_function, "bad PI value");
    params.insert(params.end(), 7, 0x00);
    params.push_back(static_cast<std::uint8_t>(arg.size()));
    params.insert(params.end(), arg.begin(), arg.end());
    params.push_back(static_cast<std::uint8_t>(pi.size()));
    params.insert(params.end(), pi.begin(), pi.end());
}

} // namespace

Bytes serialize_request(const FunctionToken& token, const std::vector<ParamToken>& params_in) {
    std::uint8_t code = token.function_code;
    bool known_code = std::find(kFunctionCodes.begin(), kFunctionCodes.end(), code) != kFunctionCodes.end();
    if (!known_code) throw Error(errc::unsupported_function, "function code 0x" + hex2(code));
    if (code == 0x00) {
        if (!token.group || !token.subfunction || !is_known_system_function(*token.group, *token.subfunction))
            throw Error(errc::unsupported_function, "system function needs a known group/subfunction");
    } else if (token.group || token.subfunction) {
        throw Error(errc::unsupported_function, "group/subfunction only valid for code 0x00");
    }

    Bytes params;
    Bytes data;
    TokenCursor cur(params_in);
    switch (code) {
        case 0xf0: build_setup(cur, params); break;
        case 0x04:
        case 0x05: build_items(code, cur, params, data); break;
        case 0x00: build_system(token, cur, params, data); break;
        case 0x1a:
        case 0x1d: build_download(code, cur, params); break;
        case 0x28:
        case 0x29: build_pi(code, cur, params); break;
        default: params.push_back(code); break;  // 0x1b, 0x1c, 0x1e, 0x1f take no tokens
    }
    cur.expect_done();

    Bytes s7;
    s7.push_back(kS7Magic);
    s7.push_back(kS7JobRequest);
    push_be16(s7, 0x0000);  // reserved
    push_be16(s7, 0x0001);  // data unit ref
    push_be16(s7, static_cast<std::uint16_t>(params.size()));
    push_be16(s7, static_cast<std::uint16_t>(data.size()));
    s7.insert(s7.end(), params.begin(), params.end());
    s7.insert(s7.end(), data.begin(), data.end());

    Bytes frame;
    frame.push_back(0x03);
    frame.push_back(0x00);
    push_be16(frame, static_cast<std::uint16_t>(4 + 3 + s7.size()));
    frame.insert(frame.end(), {0x02, kCotpData, 0x80});
    frame.insert(frame.end(), s7.begin(), s7.end());
    return frame;
}

// ---------------------------------------------------------------------------
// Validity

const char* to_string(ValidityReason reason) {
    switch (reason) {
        case ValidityReason::ok: return "ok";
        case ValidityReason::truncated_frame: return "truncated_frame";
        case ValidityReason::bad_version: return "bad_version";
        case ValidityReason::trailing_bytes: return "trailing_bytes";
        case ValidityReason::truncated_pdu: return "truncated_pdu";
        case ValidityReason::unknown_pdu_type: return "unknown_pdu_type";
        case ValidityReason::no_s7_payload: return "no_s7_payload";
        case ValidityReason::bad_magic: return "bad_magic";
    }
    return "unknown";
}

Validity classify_payload(ByteView bytes) {
    try {
        auto tpkt = parse_tpkt(bytes);
        if (tpkt.consumed != bytes.size()) return {false, ValidityReason::trailing_bytes};
        auto cotp = parse_cotp(tpkt.frame.payload);
        if (cotp.pdu_type == kCotpConnectionRequest || cotp.pdu_type == kCotpConnectionConfirm)
            return {false, ValidityReason::no_s7_payload};
        if (!cotp.is_data()) return {false, ValidityReason::unknown_pdu_type};
        (void)parse_s7(cotp.payload);
        return {true, ValidityReason::ok};
    } catch (const Error& e) {
        switch (e.code()) {
            case errc::truncated_frame: return {false, ValidityReason::truncated_frame};
            case errc::bad_version: return {false, ValidityReason::bad_version};
            case errc::bad_magic: return {false, ValidityReason::bad_magic};
            default: return {false, ValidityReason::truncated_pdu};
        }
    }
}

RequestTokens extract_request_tokens(ByteView bytes) {
    RequestTokens out;
    if (!classify_payload(bytes).valid) return out;
    auto tpkt = parse_tpkt(bytes);
    auto cotp = parse_cotp(tpkt.frame.payload);
    auto pdu = parse_s7(cotp.payload);
    try {
        out.function = extract_function_token(pdu);
    } catch (const Error&) {
        return out;  // no parameters: a valid request that contributes no tokens
    }
    out.params = extract_parameter_tokens(pdu);
    return out;
}

} // namespace icstrace::s7
