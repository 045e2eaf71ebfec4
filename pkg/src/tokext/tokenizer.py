"""Byte-fallback BPE tokenizer model with encoding, decoding, and pretokenization.

A model is a vocabulary of token entries (normal subwords, the 256 byte
tokens, and special tokens) plus an ordered list of merge rules. Encoding
splits text into marker-prefixed words, applies merges lowest-rank-first
(leftmost occurrence on positional ties), and falls back to UTF-8 byte
tokens for symbols outside the vocabulary. Models are immutable after
construction and safe for concurrent read-only use.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    InvalidByteSequence,
    InvalidModel,
    InvalidTokenId,
    MissingSymbol,
)

MARKER = "▁"
UNK_FORM = "<unk>"

BYTE_FORMS = tuple(f"<0x{b:02X}>" for b in range(256))
_BYTE_FORM_SET = frozenset(BYTE_FORMS)

KINDS = ("normal", "byte", "special")


@dataclass(frozen=True)
class TokenEntry:
    """One vocabulary entry: display form, id, and kind."""

    form: str
    id: int
    kind: str


@dataclass(frozen=True)
class MergeRule:
    """An ordered pair of forms whose concatenation is a vocabulary form.

    rank 0 is the highest priority during encoding.
    """

    left: str
    right: str
    rank: int


def nfc(text: str) -> str:
    """NFC-normalize text. Off by default everywhere; opt in via the CLI."""
    return unicodedata.normalize("NFC", text)


def pretokenize(text: str, marker: str = MARKER) -> list[str]:
    """Split text on whitespace runs into marker-prefixed words.

    The marker is prepended to every word including the first, so decoded
    tokens join back into text with single spaces. Whitespace runs collapse;
    empty input yields an empty list.
    """
    return [marker + word for word in text.split()]


class TokenizerModel:
    """Immutable vocabulary + ordered merge rules.

    Construction validates every structural invariant: unique forms,
    contiguous ids, the full byte-token block when byte_fallback is on,
    and merge rules whose parts and concatenations all resolve to
    vocabulary forms.
    """

    def __init__(
        self,
        vocabulary: list[TokenEntry],
        merges: list[MergeRule],
        marker: str = MARKER,
        byte_fallback: bool = True,
        specials: list[str] | None = None,
    ):
        self.vocabulary = tuple(vocabulary)
        self.merges = tuple(merges)
        self.marker = marker
        self.byte_fallback = byte_fallback
        self.specials = tuple(specials or [])
        self._validate()

        self._form_to_id = {e.form: e.id for e in self.vocabulary}
        self._entries_by_id = sorted(self.vocabulary, key=lambda e: e.id)
        self._merge_ranks = {(m.left, m.right): m.rank for m in self.merges}
        byte_ids = [0] * 256
        for e in self.vocabulary:
            if e.kind == "byte":
                byte_ids[int(e.form[3:5], 16)] = e.id
        self._byte_ids = byte_ids
        self._special_ids = frozenset(e.id for e in self.vocabulary if e.kind == "special")
        self._unk_id = self._form_to_id.get(UNK_FORM) if UNK_FORM in self.specials else None
        self._pretoken_cache: dict[str, tuple[int, ...]] = {}

    # -- construction & validation ------------------------------------------

    def _validate(self) -> None:
        if len(self.marker) != 1:
            raise InvalidModel("marker must be a single character")
        forms = set()
        ids = set()
        for e in self.vocabulary:
            if e.kind not in KINDS:
                raise InvalidModel(f"unknown kind {e.kind!r} for form {e.form!r}")
            if e.form in forms:
                raise InvalidModel(f"duplicate form {e.form!r}")
            if e.id in ids:
                raise InvalidModel(f"duplicate id {e.id}")
            if e.kind == "byte" and e.form not in _BYTE_FORM_SET:
                raise InvalidModel(f"byte token with non-byte form {e.form!r}")
            if e.kind != "byte" and e.form in _BYTE_FORM_SET:
                raise InvalidModel(f"byte form {e.form!r} declared as {e.kind}")
            forms.add(e.form)
            ids.add(e.id)
        if ids != set(range(len(self.vocabulary))):
            raise InvalidModel("ids are not contiguous 0..|V|-1")
        if self.byte_fallback:
            byte_forms = {e.form for e in self.vocabulary if e.kind == "byte"}
            if len(byte_forms) != 256:
                raise InvalidModel("byte fallback requires all 256 byte tokens")
        for sp in self.specials:
            if sp not in forms:
                raise InvalidModel(f"special form {sp!r} missing from vocabulary")
        ranks = set()
        for m in self.merges:
            for part in (m.left, m.right, m.left + m.right):
                if part not in forms:
                    raise InvalidModel(
                        f"merge ({m.left!r}, {m.right!r}) references unknown form {part!r}"
                    )
            if m.rank in ranks:
                raise InvalidModel(f"duplicate merge rank {m.rank}")
            ranks.add(m.rank)
        if ranks and ranks != set(range(len(self.merges))):
            raise InvalidModel("merge ranks are not contiguous 0..n-1")

    @classmethod
    def build(
        cls,
        specials: list[str],
        normal_forms: list[str],
        merge_pairs: list[tuple[str, str]],
        marker: str = MARKER,
        byte_fallback: bool = True,
    ) -> "TokenizerModel":
        """Assemble a model in the standard id layout.

        Ids run specials first, then the 256 byte tokens (when byte_fallback
        is on), then normal_forms in the given order.
        """
        vocab = []
        next_id = 0
        for form in specials:
            vocab.append(TokenEntry(form, next_id, "special"))
            next_id += 1
        if byte_fallback:
            for form in BYTE_FORMS:
                vocab.append(TokenEntry(form, next_id, "byte"))
                next_id += 1
        for form in normal_forms:
            vocab.append(TokenEntry(form, next_id, "normal"))
            next_id += 1
        merges = [MergeRule(l, r, i) for i, (l, r) in enumerate(merge_pairs)]
        return cls(vocab, merges, marker=marker, byte_fallback=byte_fallback, specials=specials)

    # -- queries --------------------------------------------------------------

    @property
    def vocab_size(self) -> int:
        return len(self.vocabulary)

    def id_to_form(self, token_id: int) -> str:
        if not 0 <= token_id < len(self._entries_by_id):
            raise InvalidTokenId(f"token id {token_id} out of range 0..{self.vocab_size - 1}")
        return self._entries_by_id[token_id].form

    def kind_of(self, token_id: int) -> str:
        if not 0 <= token_id < len(self._entries_by_id):
            raise InvalidTokenId(f"token id {token_id} out of range 0..{self.vocab_size - 1}")
        return self._entries_by_id[token_id].kind

    def form_to_id(self, form: str) -> int | None:
        return self._form_to_id.get(form)

    # -- encode ----------------------------------------------------------------

    def encode(self, text: str) -> list[int]:
        """Encode text into token ids.

        Per pretoken: split into characters, repeatedly apply the applicable
        merge with the lowest rank (leftmost occurrence on ties) until none
        applies, then map symbols to ids with UTF-8 byte fallback for symbols
        outside the vocabulary.
        """
        ids: list[int] = []
        for pretoken in pretokenize(text, self.marker):
            ids.extend(self._encode_pretoken(pretoken))
        return ids

    def _encode_pretoken(self, pretoken: str) -> tuple[int, ...]:
        cached = self._pretoken_cache.get(pretoken)
        if cached is not None:
            return cached

        symbols = list(pretoken)
        ranks = self._merge_ranks
        while len(symbols) > 1:
            best_rank = None
            best_pos = -1
            for i in range(len(symbols) - 1):
                rank = ranks.get((symbols[i], symbols[i + 1]))
                if rank is not None and (best_rank is None or rank < best_rank):
                    best_rank = rank
                    best_pos = i
            if best_rank is None:
                break
            symbols[best_pos : best_pos + 2] = [symbols[best_pos] + symbols[best_pos + 1]]

        out: list[int] = []
        for sym in symbols:
            token_id = self._form_to_id.get(sym)
            if token_id is not None:
                out.append(token_id)
            elif self.byte_fallback:
                out.extend(self._byte_ids[b] for b in sym.encode("utf-8"))
            elif self._unk_id is not None:
                out.append(self._unk_id)
            else:
                raise MissingSymbol(
                    f"symbol {sym!r} not in vocabulary and byte fallback is off"
                )
        result = tuple(out)
        self._pretoken_cache[pretoken] = result
        return result

    # -- decode ----------------------------------------------------------------

    def decode(self, ids: list[int]) -> str:
        """Decode token ids back to text.

        Byte-token runs decode as UTF-8 (the decoded content is kept verbatim),
        the marker maps to a space in normal forms, specials are dropped, and
        one leading space is stripped.
        """
        pieces: list[str] = []
        byte_run: list[int] = []
        run_start = 0

        def flush(position: int) -> None:
            if not byte_run:
                return
            raw = bytes(byte_run)
            try:
                pieces.append(raw.decode("utf-8"))
            except UnicodeDecodeError as exc:
                raise InvalidByteSequence(
                    f"byte-token run starting at sequence offset {run_start} "
                    f"is not valid UTF-8: {raw!r}",
                    offset=run_start,
                ) from exc
            byte_run.clear()

        for pos, token_id in enumerate(ids):
            if not 0 <= token_id < len(self._entries_by_id):
                raise InvalidTokenId(
                    f"token id {token_id} out of range 0..{self.vocab_size - 1}"
                )
            entry = self._entries_by_id[token_id]
            if entry.kind == "byte":
                if not byte_run:
                    run_start = pos
                byte_run.append(int(entry.form[3:5], 16))
                continue
            flush(pos)
            if entry.kind == "special":
                continue
            pieces.append(entry.form.replace(self.marker, " "))
        flush(len(ids))

        text = "".join(pieces)
        if text.startswith(" "):
            text = text[1:]
        return text

    # -- interchange file --------------------------------------------------------

    def to_payload(self) -> dict:
        return {
            "format_version": 1,
            "marker": self.marker,
            "byte_fallback": self.byte_fallback,
            "specials": list(self.specials),
            "vocab": [
                {"form": e.form, "id": e.id, "kind": e.kind} for e in self._entries_by_id
            ],
            "merges": [[m.left, m.right] for m in self.merges],
        }

    def save(self, path: str | Path) -> None:
        payload = self.to_payload()
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, ensure_ascii=False, separators=(",", ":"))
            fh.write("\n")

    @classmethod
    def from_payload(cls, payload: dict) -> "TokenizerModel":
        if not isinstance(payload, dict):
            raise InvalidModel("tokenizer file must hold a JSON object")
        version = payload.get("format_version")
        if version != 1:
            raise InvalidModel(f"unknown format_version {version!r}")
        try:
            vocab = [
                TokenEntry(str(v["form"]), int(v["id"]), str(v["kind"]))
                for v in payload["vocab"]
            ]
            merges = [
                MergeRule(str(left), str(right), rank)
                for rank, (left, right) in enumerate(payload["merges"])
            ]
            return cls(
                vocab,
                merges,
                marker=str(payload["marker"]),
                byte_fallback=bool(payload["byte_fallback"]),
                specials=[str(s) for s in payload["specials"]],
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidModel(f"malformed tokenizer file: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "TokenizerModel":
        with open(path, encoding="utf-8") as fh:
            try:
                payload = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InvalidModel(f"tokenizer file is not valid JSON: {exc}") from exc
        return cls.from_payload(payload)
