#include "tensor_archive.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "ivoct/model.hpp"

namespace ivoct::model {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "archive format assumes little-endian");

namespace {

constexpr char kMagic[8] = {'I', 'V', 'O', 'C', 'T', 'A', 'R', 'C'};
constexpr std::uint32_t kContainerVersion = 1;

template <typename T>
void append_pod(std::string& out, T value) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    out.append(bytes, sizeof(T));
}

template <typename T>
T read_pod(const std::string& data, std::size_t offset) {
    T value;
    std::memcpy(&value, data.data() + offset, sizeof(T));
    return value;
}

std::uint32_t crc32_of(const char* data, std::size_t size) {
    uLong crc = crc32(0L, Z_NULL, 0);
    while (size > 0) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
        crc = crc32(crc, reinterpret_cast<const Bytef*>(data), chunk);
        data += chunk;
        size -= chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

std::string dtype_name(const torch::Tensor& t) {
    if (t.scalar_type() == torch::kFloat32) return "float32";
    if (t.scalar_type() == torch::kInt64) return "int64";
    throw CheckpointError("unsupported tensor dtype for archive");
}

}  // namespace

void write_tensor_archive(const TensorArchive& archive, const fs::path& path) {
    json header;
    header["kind"] = archive.kind;
    header["schema_version"] = archive.schema_version;
    header["meta"] = archive.meta;
    header["tensors"] = json::array();

    std::string payload;
    std::vector<torch::Tensor> contiguous;
    contiguous.reserve(archive.tensors.size());
    std::size_t offset = 0;
    for (const auto& [name, tensor] : archive.tensors) {
        auto t = tensor.detach().to(torch::kCPU).contiguous();
        const std::size_t nbytes = t.numel() * t.element_size();
        header["tensors"].push_back({{"name", name},
                                     {"dtype", dtype_name(t)},
                                     {"shape", t.sizes().vec()},
                                     {"offset", offset},
                                     {"nbytes", nbytes}});
        offset += nbytes;
        contiguous.push_back(std::move(t));
    }
    payload.reserve(offset);
    for (const auto& t : contiguous) {
        payload.append(static_cast<const char*>(t.data_ptr()), t.numel() * t.element_size());
    }

    const std::string header_text = header.dump();
    std::string blob;
    blob.reserve(8 + 4 + 8 + header_text.size() + payload.size() + 4);
    blob.append(kMagic, sizeof kMagic);
    append_pod<std::uint32_t>(blob, kContainerVersion);
    append_pod<std::uint64_t>(blob, header_text.size());
    blob += header_text;
    blob += payload;
    append_pod<std::uint32_t>(blob, crc32_of(blob.data(), blob.size()));

    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write '" + path.string() + "'");
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw CheckpointError("failed writing '" + path.string() + "'");
}

TensorArchive read_tensor_archive(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open '" + path.string() + "'");
    const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::string where = " ('" + path.string() + "')";

    constexpr std::size_t kFixed = sizeof kMagic + 4 + 8;
    if (data.size() < kFixed + 4) throw CheckpointError("corrupt archive: truncated" + where);
    if (std::memcmp(data.data(), kMagic, sizeof kMagic) != 0) {
        throw CheckpointError("corrupt archive: bad magic" + where);
    }
    const auto container = read_pod<std::uint32_t>(data, 8);
    if (container != kContainerVersion) {
        throw CheckpointError("unsupported archive container version " + std::to_string(container) + where);
    }
    const auto header_len = read_pod<std::uint64_t>(data, 12);
    if (header_len > data.size() - kFixed - 4) {
        throw CheckpointError("corrupt archive: truncated header" + where);
    }
    const auto stored_crc = read_pod<std::uint32_t>(data, data.size() - 4);
    if (stored_crc != crc32_of(data.data(), data.size() - 4)) {
        throw CheckpointError("corrupt archive: checksum mismatch (truncated or modified)" + where);
    }

    TensorArchive archive;
    json header;
    try {
        header = json::parse(data.begin() + kFixed, data.begin() + static_cast<std::ptrdiff_t>(kFixed + header_len));
        archive.kind = header.at("kind").get<std::string>();
        archive.schema_version = header.at("schema_version").get<std::uint32_t>();
        archive.meta = header.at("meta");
    } catch (const json::exception& e) {
        throw CheckpointError(std::string("corrupt archive header: ") + e.what() + where);
    }

    const std::size_t payload_start = kFixed + header_len;
    const std::size_t payload_size = data.size() - 4 - payload_start;
    try {
        for (const auto& entry : header.at("tensors")) {
            const auto name = entry.at("name").get<std::string>();
            const auto dtype = entry.at("dtype").get<std::string>();
            const auto shape = entry.at("shape").get<std::vector<std::int64_t>>();
            const auto offset = entry.at("offset").get<std::size_t>();
            const auto nbytes = entry.at("nbytes").get<std::size_t>();
            const auto scalar = dtype == "float32" ? torch::kFloat32
                                : dtype == "int64" ? torch::kInt64
                                                   : throw CheckpointError("unknown dtype '" + dtype + "'" + where);
            auto tensor = torch::empty(shape, torch::TensorOptions().dtype(scalar));
            if (static_cast<std::size_t>(tensor.numel()) * tensor.element_size() != nbytes ||
                offset > payload_size || nbytes > payload_size - offset) {
                throw CheckpointError("corrupt archive: tensor '" + name + "' out of bounds" + where);
            }
            std::memcpy(tensor.data_ptr(), data.data() + payload_start + offset, nbytes);
            archive.tensors.emplace_back(name, std::move(tensor));
        }
    } catch (const json::exception& e) {
        throw CheckpointError(std::string("corrupt archive tensor index: ") + e.what() + where);
    }
    return archive;
}

}  // namespace ivoct::model
