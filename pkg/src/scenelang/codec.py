"""Compact binary scene encoding.

The format is little-endian and fixed-stride so its length is exactly
``2 + 8 * len(objects)`` bytes for every profile:

  header (2 bytes)
    byte 0   object count (0..count_max)
    byte 1   profile tag: crc32(profile name) & 0xFF

  per object (8 bytes)
    byte 0   packed attribute bitfield, low bits first, attributes in
             profile order (the ``facing`` attribute is excluded here);
             each attribute takes ceil(log2(len(vocabulary))) bits.
             CLEVR: color bits 0-2, shape bits 3-4, material bit 5,
             size bit 6, bit 7 pad.
    byte 1-3 coordinates, one byte per axis in profile order, quantized
             to 0..255 over the axis bounds; unused axes are zero.
    byte 4   spare attribute byte: the ``facing`` vocabulary index for
             profiles with a facing attribute, else overflow for packed
             bitfields past 8 bits, else zero.
    byte 5   pose quantized to 1..255 over [0, 2*pi); zero when unset.
    byte 6-7 reserved, zero.

Quantizing an axis value v in [lo, hi] stores round((v - lo) / (hi - lo)
* 255); decoding returns lo + q * (hi - lo) / 255, so the decode error is
at most (hi - lo) / 510 per axis, within the (hi - lo) / 256 contract.
"""

from __future__ import annotations

import math
import zlib

from .errors import CodecError
from .profiles import FACING_ATTRIBUTE, DomainProfile
from .scenes import ObjectRecord, Scene, validate_scene

HEADER_BYTES = 2
RECORD_BYTES = 8
_TWO_PI = 2.0 * math.pi


def profile_tag(profile: DomainProfile) -> int:
    return zlib.crc32(profile.name.encode("utf-8")) & 0xFF


def encoded_length(n_objects: int) -> int:
    return HEADER_BYTES + RECORD_BYTES * n_objects


def _packing_plan(profile: DomainProfile) -> list[tuple[str, int, int]]:
    """(attribute, bit offset, bit width) rows for the packed bitfield.

    Non-facing attributes fill a 16-bit field (byte 0 of the record, then the
    spare byte); profiles with a facing attribute reserve the spare byte for
    facing, capping the bitfield at 8 bits.
    """
    plan: list[tuple[str, int, int]] = []
    offset = 0
    for attr, vocab in profile.attributes.items():
        if attr == FACING_ATTRIBUTE:
            continue
        width = max(1, math.ceil(math.log2(len(vocab)))) if len(vocab) > 1 else 1
        plan.append((attr, offset, width))
        offset += width
    limit = 8 if FACING_ATTRIBUTE in profile.attributes else 16
    if offset > limit:
        raise CodecError(f"attributes need {offset} bits, exceeding the {limit}-bit bitfield")
    return plan


def _quantize(value: float, lo: float, hi: float) -> int:
    if not lo <= value <= hi:
        raise CodecError(f"coordinate {value} outside bounds [{lo}, {hi}]")
    return round((value - lo) * 255.0 / (hi - lo))


def _dequantize(q: int, lo: float, hi: float) -> float:
    return lo + q * (hi - lo) / 255.0


def encode_compact(scene: Scene, profile: DomainProfile) -> bytes:
    """Encode a valid scene; length is exactly ``2 + 8 * len(objects)``."""
    violations = validate_scene(scene, profile)
    if violations:
        raise CodecError(f"scene invalid: {violations[0]}")
    plan = _packing_plan(profile)
    out = bytearray()
    out.append(len(scene.objects))
    out.append(profile_tag(profile))
    has_facing = FACING_ATTRIBUTE in profile.attributes
    for obj in scene.objects:
        bits = 0
        for attr, offset, _width in plan:
            index = profile.attributes[attr].index(obj.entries[attr])
            bits |= index << offset
        record = bytearray(RECORD_BYTES)
        record[0] = bits & 0xFF
        for axis, value in enumerate(obj.position):
            lo, hi = profile.bounds[axis]
            record[1 + axis] = _quantize(value, lo, hi)
        if has_facing:
            record[4] = profile.attributes[FACING_ATTRIBUTE].index(obj.entries[FACING_ATTRIBUTE])
        else:
            record[4] = (bits >> 8) & 0xFF
        if obj.pose is not None:
            record[5] = 1 + round((obj.pose % _TWO_PI) * 254.0 / _TWO_PI)
        out.extend(record)
    return bytes(out)


def decode_compact(data: bytes, profile: DomainProfile, scene_id: str = "decoded") -> Scene:
    """Decode one compact scene; inverse of :func:`encode_compact`.

    Discrete attributes round-trip exactly; each coordinate is reproduced
    within one quantization step of its original value.
    """
    scene, used = _decode_record(data, profile, scene_id)
    if used != len(data):
        raise CodecError(f"truncated input: {len(data)} bytes, expected {used}")
    return scene


def _decode_record(data: bytes, profile: DomainProfile, scene_id: str) -> tuple[Scene, int]:
    if len(data) < HEADER_BYTES:
        raise CodecError(f"truncated input: {len(data)} bytes, need at least {HEADER_BYTES}")
    count = data[0]
    tag = data[1]
    expected_tag = profile_tag(profile)
    if tag != expected_tag:
        raise CodecError(f"unknown profile tag 0x{tag:02x} (profile '{profile.name}' is 0x{expected_tag:02x})")
    if count > profile.count_max:
        raise CodecError(f"object count {count} exceeds count_max {profile.count_max}")
    total = encoded_length(count)
    if len(data) < total:
        raise CodecError(f"truncated input: {len(data)} bytes, expected {total}")
    plan = _packing_plan(profile)
    has_facing = FACING_ATTRIBUTE in profile.attributes
    objects = []
    for i in range(count):
        record = data[HEADER_BYTES + i * RECORD_BYTES : HEADER_BYTES + (i + 1) * RECORD_BYTES]
        bits = record[0]
        if not has_facing:
            bits |= record[4] << 8
        entries: dict[str, str] = {}
        for attr, offset, width in plan:
            index = (bits >> offset) & ((1 << width) - 1)
            vocab = profile.attributes[attr]
            if index >= len(vocab):
                raise CodecError(f"attribute '{attr}' index {index} out of range")
            entries[attr] = vocab[index]
        if has_facing:
            vocab = profile.attributes[FACING_ATTRIBUTE]
            if record[4] >= len(vocab):
                raise CodecError(f"attribute '{FACING_ATTRIBUTE}' index {record[4]} out of range")
            entries[FACING_ATTRIBUTE] = vocab[record[4]]
        position = tuple(
            _dequantize(record[1 + axis], *profile.bounds[axis]) for axis in range(profile.coordinate_dims)
        )
        pose = None if record[5] == 0 else (record[5] - 1) * _TWO_PI / 254.0
        objects.append(ObjectRecord(id=i, entries=entries, position=position, pose=pose))
    scene = Scene(scene_id=scene_id, profile_name=profile.name, objects=tuple(objects))
    return scene, total


def encode_scenes(scenes: list[Scene], profile: DomainProfile) -> bytes:
    """Concatenate compact encodings; records are self-delimiting via the count byte."""
    return b"".join(encode_compact(scene, profile) for scene in scenes)


def decode_scenes(data: bytes, profile: DomainProfile, id_prefix: str = "scene") -> list[Scene]:
    scenes = []
    offset = 0
    index = 0
    while offset < len(data):
        scene, used = _decode_record(data[offset:], profile, f"{id_prefix}-{index:05d}")
        scenes.append(scene)
        offset += used
        index += 1
    return scenes
