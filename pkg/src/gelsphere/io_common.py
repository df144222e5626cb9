"""Framed binary file helpers shared by model/dataset serialization.

Layout: magic (4 bytes) + version (u16 LE) + payload + CRC32 (u32 LE) of
everything preceding it.  All integers little-endian.
"""

from __future__ import annotations

import struct
import zlib


class CrcMismatch(Exception):
    pass


class Malformed(Exception):
    pass


class BadMagic(Malformed):
    pass


class VersionMismatch(Malformed):
    pass


def frame_file(magic: bytes, version: int, payload: bytes) -> bytes:
    if len(magic) != 4:
        raise ValueError("magic must be 4 bytes")
    body = magic + struct.pack("<H", version) + payload
    return body + struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF)


def unframe_file(data: bytes, magic: bytes, version: int) -> bytes:
    if len(data) < 10:
        raise Malformed("file too short")
    body, crc = data[:-4], struct.unpack("<I", data[-4:])[0]
    if (zlib.crc32(body) & 0xFFFFFFFF) != crc:
        raise CrcMismatch("trailing CRC32 does not match contents")
    if body[:4] != magic:
        raise BadMagic(f"expected magic {magic!r}, found {body[:4]!r}")
    ver = struct.unpack("<H", body[4:6])[0]
    if ver != version:
        raise VersionMismatch(f"expected version {version}, found {ver}")
    return body[6:]


def write_framed(path, magic: bytes, version: int, payload: bytes) -> None:
    with open(path, "wb") as f:
        f.write(frame_file(magic, version, payload))


def read_framed(path, magic: bytes, version: int) -> bytes:
    with open(path, "rb") as f:
        return unframe_file(f.read(), magic, version)
