"""Word-level encoder-decoder backend with beam-search decoding.

A compact transformer trained from scratch on the serialized inputs. The
boundary markers ([CXT], [ANS], [SKL]) are atomic vocabulary items because
tokenization is whitespace word-level. The backend is deliberately small so
desk-scale experiments stay CPU-friendly; anything satisfying the same
``token_count`` / ``fit_step`` / ``beam_generate`` surface can replace it.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import torch
from torch import nn

PAD, BOS, EOS, UNK = "<pad>", "<s>", "</s>", "<unk>"
_RESERVED = (PAD, BOS, EOS, UNK)


class WordVocab:
    """Whitespace word-level vocabulary with reserved control tokens."""

    def __init__(self, words: list[str]):
        self.itos = list(_RESERVED) + [w for w in words if w not in _RESERVED]
        self.stoi = {w: i for i, w in enumerate(self.itos)}
        self.pad_id, self.bos_id, self.eos_id, self.unk_id = (
            self.stoi[t] for t in _RESERVED
        )

    def __len__(self) -> int:
        return len(self.itos)

    @classmethod
    def build(cls, texts) -> "WordVocab":
        seen: dict[str, None] = {}
        for text in texts:
            for word in text.split():
                seen.setdefault(word)
        return cls(list(seen))

    def encode(self, text: str, add_bos: bool = False, add_eos: bool = False) -> list[int]:
        ids = [self.stoi.get(w, self.unk_id) for w in text.split()]
        if add_bos:
            ids = [self.bos_id] + ids
        if add_eos:
            ids = ids + [self.eos_id]
        return ids

    def decode(self, ids) -> str:
        skip = {self.pad_id, self.bos_id, self.eos_id}
        return " ".join(self.itos[i] for i in ids if i not in skip)

    def token_count(self, text: str) -> int:
        return len(text.split())

    def to_json(self) -> dict:
        return {"itos": self.itos}

    @classmethod
    def from_json(cls, payload: dict) -> "WordVocab":
        vocab = cls.__new__(cls)
        vocab.itos = list(payload["itos"])
        vocab.stoi = {w: i for i, w in enumerate(vocab.itos)}
        vocab.pad_id, vocab.bos_id, vocab.eos_id, vocab.unk_id = (
            vocab.stoi[t] for t in _RESERVED
        )
        return vocab


@dataclass
class BackendConfig:
    d_model: int = 128
    nhead: int = 4
    encoder_layers: int = 2
    decoder_layers: int = 2
    feedforward: int = 256
    dropout: float = 0.1
    max_positions: int = 512


class _Seq2SeqModel(nn.Module):
    def __init__(self, vocab_size: int, cfg: BackendConfig, pad_id: int):
        super().__init__()
        self.cfg = cfg
        self.pad_id = pad_id
        self.embed = nn.Embedding(vocab_size, cfg.d_model, padding_idx=pad_id)
        self.pos = nn.Embedding(cfg.max_positions, cfg.d_model)
        self.transformer = nn.Transformer(
            d_model=cfg.d_model,
            nhead=cfg.nhead,
            num_encoder_layers=cfg.encoder_layers,
            num_decoder_layers=cfg.decoder_layers,
            dim_feedforward=cfg.feedforward,
            dropout=cfg.dropout,
            batch_first=True,
        )
        # padded batches are small here; nested-tensor fast paths only add noise
        self.transformer.encoder.enable_nested_tensor = False
        if hasattr(self.transformer.encoder, "use_nested_tensor"):
            self.transformer.encoder.use_nested_tensor = False
        self.out = nn.Linear(cfg.d_model, vocab_size)
        self.scale = math.sqrt(cfg.d_model)

    def _embed(self, ids: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(ids.shape[1], device=ids.device).unsqueeze(0)
        return self.embed(ids) * self.scale + self.pos(positions)

    def encode(self, src: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        src_pad = src == self.pad_id
        memory = self.transformer.encoder(self._embed(src), src_key_padding_mask=src_pad)
        return memory, src_pad

    def decode_step(self, memory, src_pad, tgt: torch.Tensor) -> torch.Tensor:
        causal = torch.triu(
            torch.ones(tgt.shape[1], tgt.shape[1], dtype=torch.bool, device=tgt.device),
            diagonal=1,
        )
        hidden = self.transformer.decoder(
            self._embed(tgt),
            memory,
            tgt_mask=causal,
            tgt_key_padding_mask=tgt == self.pad_id,
            memory_key_padding_mask=src_pad,
        )
        return self.out(hidden)

    def forward(self, src: torch.Tensor, tgt_in: torch.Tensor) -> torch.Tensor:
        memory, src_pad = self.encode(src)
        return self.decode_step(memory, src_pad, tgt_in)


@dataclass
class BeamHypothesis:
    tokens: list[int]
    score: float
    finished: bool


class TinySeq2SeqBackend:
    """Trainable word-level seq2seq with deterministic beam decoding."""

    def __init__(self, vocab: WordVocab, cfg: BackendConfig | None = None, device: str = "cpu"):
        self.vocab = vocab
        self.cfg = cfg or BackendConfig()
        self.device = device
        self.model = _Seq2SeqModel(len(vocab), self.cfg, vocab.pad_id).to(device)

    # -- training surface ---------------------------------------------------

    def token_count(self, text: str) -> int:
        return self.vocab.token_count(text)

    def batch_tensors(self, sources: list[str], targets: list[str]):
        """Pad a batch; targets get BOS/EOS and a shifted label copy."""
        src_ids = [self.vocab.encode(s)[: self.cfg.max_positions] for s in sources]
        tgt_ids = [
            self.vocab.encode(t, add_bos=True, add_eos=True)[: self.cfg.max_positions]
            for t in targets
        ]
        src = self._pad(src_ids)
        tgt = self._pad(tgt_ids)
        tgt_in, labels = tgt[:, :-1], tgt[:, 1:]
        return src, tgt_in, labels

    def _pad(self, rows: list[list[int]]) -> torch.Tensor:
        width = max(len(r) for r in rows)
        out = torch.full((len(rows), width), self.vocab.pad_id, dtype=torch.long)
        for i, row in enumerate(rows):
            out[i, : len(row)] = torch.tensor(row, dtype=torch.long)
        return out.to(self.device)

    def sequence_nll(self, src: torch.Tensor, tgt_in: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
        """Per-sequence summed NLL, averaged over the batch."""
        logits = self.model(src, tgt_in)
        log_probs = torch.log_softmax(logits, dim=-1)
        picked = log_probs.gather(-1, labels.unsqueeze(-1)).squeeze(-1)
        mask = labels != self.vocab.pad_id
        per_sequence = -(picked * mask).sum(dim=1)
        return per_sequence.mean()

    # -- decoding -------------------------------------------------------------

    @torch.no_grad()
    def beam_generate(
        self,
        source: str,
        beam_size: int,
        max_new_tokens: int,
    ) -> list[tuple[str, float]]:
        """Beam search; returns (text, sequence log-prob) best-first.

        Scores are raw summed token log-probabilities (no length penalty).
        """
        self.model.eval()
        src = self._pad([self.vocab.encode(source)[: self.cfg.max_positions]])
        memory, src_pad = self.model.encode(src)
        beams = [BeamHypothesis([self.vocab.bos_id], 0.0, False)]
        for _ in range(max_new_tokens):
            if all(b.finished for b in beams):
                break
            active = [b for b in beams if not b.finished]
            tgt = self._pad([b.tokens for b in active])
            logits = self.model.decode_step(
                memory.expand(len(active), -1, -1), src_pad.expand(len(active), -1), tgt
            )
            step_log_probs = torch.log_softmax(logits, dim=-1)
            expansions: list[BeamHypothesis] = [b for b in beams if b.finished]
            for row, beam in enumerate(active):
                scores, ids = step_log_probs[row, len(beam.tokens) - 1].topk(
                    min(beam_size, len(self.vocab))
                )
                for score, token in zip(scores.tolist(), ids.tolist()):
                    expansions.append(
                        BeamHypothesis(
                            beam.tokens + [token],
                            beam.score + score,
                            token == self.vocab.eos_id,
                        )
                    )
            expansions.sort(key=lambda b: (-b.score, self.vocab.decode(b.tokens)))
            beams = expansions[:beam_size]
        dedup: dict[str, float] = {}
        for hyp in beams:
            text = self.vocab.decode(hyp.tokens)
            if not text:
                continue
            if text not in dedup or hyp.score > dedup[text]:
                dedup[text] = hyp.score
        ranked = sorted(dedup.items(), key=lambda item: (-item[1], item[0]))
        return ranked[:beam_size]

    # -- persistence -----------------------------------------------------------

    def save(self, directory: Path | str) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        torch.save(self.model.state_dict(), directory / "model.pt")
        payload = {"vocab": self.vocab.to_json(), "config": asdict(self.cfg)}
        (directory / "backend.json").write_text(json.dumps(payload), encoding="utf-8")

    @classmethod
    def load(cls, directory: Path | str, device: str = "cpu") -> "TinySeq2SeqBackend":
        directory = Path(directory)
        payload = json.loads((directory / "backend.json").read_text(encoding="utf-8"))
        vocab = WordVocab.from_json(payload["vocab"])
        backend = cls(vocab, BackendConfig(**payload["config"]), device)
        state = torch.load(directory / "model.pt", map_location=device)
        backend.model.load_state_dict(state)
        return backend
