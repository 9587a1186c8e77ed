#pragma once

// Self-describing container for named tensors plus JSON metadata.
//
// Layout (little-endian):
//   8 bytes   magic "IVOCTARC"
//   u32       container version (1)
//   u64       header length H
//   H bytes   JSON header: {"kind", "schema_version", "meta", "tensors": [
//               {"name", "dtype": "float32"|"int64", "shape", "offset", "nbytes"}]}
//   payload   tensor bytes, offsets relative to the payload start
//   u32       CRC-32 (zlib) of every preceding byte

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <torch/torch.h>

#include "json.hpp"

namespace ivoct::model {

struct TensorArchive {
    std::string kind;
    std::uint32_t schema_version = 0;
    nlohmann::json meta;
    std::vector<std::pair<std::string, torch::Tensor>> tensors;
};

/// Throws CheckpointError on I/O failure.
void write_tensor_archive(const TensorArchive& archive, const std::filesystem::path& path);

/// Throws CheckpointError when the file is missing, truncated, fails its
/// checksum, or is otherwise malformed.
TensorArchive read_tensor_archive(const std::filesystem::path& path);

}  // namespace ivoct::model
