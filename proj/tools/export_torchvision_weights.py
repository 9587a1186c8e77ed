#!/usr/bin/env python3
"""Export backbone weights from torchvision / timm into .ivw archives.

Usage:
    export_torchvision_weights.py --out-dir CACHE [--backbone NAME ...]
        Writes ImageNet weights (needs network access for the downloads)
        to CACHE/<name>.ivw, the layout build_model() expects.

    export_torchvision_weights.py --parity FILE --backbone NAME [--seed N]
        Writes a randomly initialized backbone together with a probe input
        and the reference pooled features, used by the parity test.
"""

import argparse
import json
import struct
import sys
import zlib

import torch

MAGIC = b"IVOCTARC"
CONTAINER_VERSION = 1
BACKBONES = ["resnet50", "resnet101", "inception_v3", "inception_resnet_v2"]


def build(name, pretrained):
    if name in ("resnet50", "resnet101", "inception_v3"):
        import torchvision.models as tvm

        if name == "inception_v3":
            weights = tvm.Inception_V3_Weights.IMAGENET1K_V1 if pretrained else None
            model = tvm.inception_v3(weights=weights, aux_logits=True, init_weights=True,
                                     transform_input=False)
            model.AuxLogits = None
            model.aux_logits = False
        else:
            enum = {"resnet50": tvm.ResNet50_Weights, "resnet101": tvm.ResNet101_Weights}[name]
            model = getattr(tvm, name)(weights=enum.IMAGENET1K_V1 if pretrained else None)
        model.fc = torch.nn.Identity()
        return model
    if name == "inception_resnet_v2":
        import timm

        model = timm.create_model("inception_resnet_v2", pretrained=pretrained)
        model.reset_classifier(0)
        return model
    raise SystemExit(f"unknown backbone {name}")


def write_archive(path, kind, meta, tensors):
    entries = []
    payload = bytearray()
    for name, t in tensors:
        t = t.detach().cpu().contiguous()
        if t.dtype == torch.float32:
            dtype = "float32"
        elif t.dtype == torch.int64:
            dtype = "int64"
        else:
            raise SystemExit(f"unsupported dtype {t.dtype} for {name}")
        data = t.numpy().tobytes()
        entries.append({"name": name, "dtype": dtype, "shape": list(t.shape),
                        "offset": len(payload), "nbytes": len(data)})
        payload += data
    header = json.dumps({"kind": kind, "schema_version": 1, "meta": meta,
                         "tensors": entries}).encode()
    blob = MAGIC + struct.pack("<IQ", CONTAINER_VERSION, len(header)) + header + bytes(payload)
    blob += struct.pack("<I", zlib.crc32(blob) & 0xFFFFFFFF)
    with open(path, "wb") as f:
        f.write(blob)


def state_tensors(model):
    return [(k, v) for k, v in model.state_dict().items() if not k.startswith(("fc.", "classif."))]


def export_pretrained(args):
    import os

    os.makedirs(args.out_dir, exist_ok=True)
    for name in args.backbone or BACKBONES:
        model = build(name, pretrained=True).eval()
        path = os.path.join(args.out_dir, f"{name}.ivw")
        write_archive(path, "weights", {"backbone": name}, state_tensors(model))
        print(f"wrote {path}")


def export_parity(args):
    if not args.backbone or len(args.backbone) != 1:
        raise SystemExit("--parity needs exactly one --backbone")
    name = args.backbone[0]
    torch.manual_seed(args.seed)
    model = build(name, pretrained=False)
    # Non-trivial running statistics so the buffers are exercised too.
    with torch.no_grad():
        for m in model.modules():
            if isinstance(m, torch.nn.BatchNorm2d):
                m.running_mean.normal_(0.0, 0.1)
                m.running_var.uniform_(0.5, 1.5)
    model.eval()
    probe = torch.randn(2, 3, args.size, args.size)
    with torch.no_grad():
        features = model(probe)
    tensors = state_tensors(model)
    tensors += [("__probe__", probe), ("__features__", features)]
    write_archive(args.parity, "parity", {"backbone": name}, tensors)
    print(f"wrote {args.parity} features {tuple(features.shape)}")


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--out-dir")
    parser.add_argument("--backbone", action="append", choices=BACKBONES)
    parser.add_argument("--parity")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--size", type=int, default=270)
    args = parser.parse_args()
    if args.parity:
        export_parity(args)
    elif args.out_dir:
        export_pretrained(args)
    else:
        parser.error("one of --out-dir or --parity is required")
    return 0


if __name__ == "__main__":
    sys.exit(main())
