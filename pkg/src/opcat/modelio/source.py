"""JSON decoding that remembers the line each object starts on and rejects duplicate keys."""
from __future__ import annotations

import json
from json.decoder import JSONObject
from json.scanner import py_make_scanner

from ..errors import ParseError


class Node(dict):
    """A decoded JSON object; ``line`` is the 1-based line of its opening brace."""

    line: int = 0


class _Decoder(json.JSONDecoder):
    def __init__(self, source: str):
        super().__init__()
        self.source = source

        def parse_object(s_and_end, strict, scan_once, object_hook, object_pairs_hook, memo=None, _w=None):
            s, end = s_and_end
            line = s.count("\n", 0, end) + 1
            pairs, end = JSONObject(s_and_end, strict, scan_once, None, lambda p: p, memo)
            node = Node()
            node.line = line
            for k, v in pairs:
                if k in node:
                    raise ParseError(f"duplicate key {k!r}", line, 0, source)
                node[k] = v
            return node, end

        self.parse_object = parse_object
        self.scan_once = py_make_scanner(self)


def parse_json(text: str, source: str = "<string>") -> Node:
    try:
        doc = _Decoder(source).decode(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, e.colno, source) from None
    if not isinstance(doc, Node):
        raise ParseError("top level must be an object", 1, 1, source)
    return doc


def line_of(node, default: int = 0) -> int:
    return getattr(node, "line", default)
