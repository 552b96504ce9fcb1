from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from mixnet_workbench.bacap import (
    BacapBox,
    BoxMismatchError,
    CapabilityRegressionError,
    Context,
    DecryptionError,
    EncodingError,
    IndexOverflowError,
    ReadCap,
    SequenceCursor,
    SignatureError,
    TombstoneError,
    WriteCap,
    advance_cap,
    generate_write_cap,
    keys_at,
    make_tombstone,
    open_box,
    read_cap_from,
    recover_root,
    rekey,
    seal,
    verify,
)
from mixnet_workbench.bacap.caps import MAX_INDEX
from mixnet_workbench.crypto_core import GroupScalar, base_mult, signature_nonce

CTX = Context.from_public_value(b'week 0')


@pytest.fixture
def write_cap(entropy) -> WriteCap:
    return generate_write_cap(entropy)


def test_initial_index_is_in_lower_half(write_cap):
    assert 0 <= write_cap.index < 2**63


def test_reader_and_writer_derive_the_same_boxes(write_cap):
    writer = SequenceCursor(write_cap, CTX)
    reader = SequenceCursor(read_cap_from(write_cap), CTX)
    for _ in range(5):
        w, r = next(writer), next(reader)
        assert (w.index, w.box_id, w.encryption_key) == (r.index, r.box_id, r.encryption_key)


def test_box_ids_differ_between_contexts(write_cap):
    other = Context.from_public_value(b'week 1')
    assert keys_at(write_cap, CTX, write_cap.index).box_id != keys_at(write_cap, other, write_cap.index).box_id


def test_box_ids_are_unique_along_the_sequence(write_cap):
    ids = [keys.box_id for keys, _ in zip(SequenceCursor(write_cap, CTX), range(20))]
    assert len(set(ids)) == 20


def test_seal_and_open(write_cap):
    keys = keys_at(write_cap, CTX, write_cap.index + 3)
    box = seal(keys, write_cap, b'hello reader')
    assert verify(box)
    reader_keys = keys_at(read_cap_from(write_cap), CTX, write_cap.index + 3)
    assert open_box(reader_keys, box) == b'hello reader'


def test_verification_needs_only_the_box(write_cap):
    box = seal(keys_at(write_cap, CTX, write_cap.index), write_cap, b'm')
    forged = BacapBox(box.box_id, box.ciphertext[:-1] + bytes([box.ciphertext[-1] ^ 1]), box.signature)
    assert not verify(forged)


def test_open_rejects_tampering(write_cap):
    keys = keys_at(write_cap, CTX, write_cap.index)
    box = seal(keys, write_cap, b'm')
    with pytest.raises(SignatureError):
        open_box(keys, BacapBox(box.box_id, box.ciphertext, bytes(64)))
    with pytest.raises(BoxMismatchError):
        open_box(keys_at(write_cap, CTX, write_cap.index + 1), box)


def test_open_with_wrong_key_fails(write_cap, entropy):
    keys = keys_at(write_cap, CTX, write_cap.index)
    box = seal(keys, write_cap, b'm')
    wrong = keys_at(rekey(write_cap, entropy), CTX, write_cap.index)
    rebound = type(keys)(keys.index, keys.box_id, wrong.encryption_key, keys.blinding, keys.next_state)
    with pytest.raises(DecryptionError):
        open_box(rebound, box)


def test_tombstone(write_cap):
    keys = keys_at(write_cap, CTX, write_cap.index)
    tombstone = make_tombstone(keys, write_cap)
    assert tombstone.is_tombstone and verify(tombstone)
    with pytest.raises(TombstoneError):
        open_box(keys, tombstone)


def test_advance_is_forward_only(write_cap):
    ahead = advance_cap(write_cap, write_cap.index + 4)
    assert keys_at(ahead, CTX, ahead.index).box_id == keys_at(write_cap, CTX, write_cap.index + 4).box_id
    with pytest.raises(CapabilityRegressionError):
        advance_cap(ahead, write_cap.index)


def test_index_space_is_bounded(write_cap):
    with pytest.raises(CapabilityRegressionError):
        advance_cap(write_cap, MAX_INDEX + 1)
    last = replace(read_cap_from(write_cap), index=MAX_INDEX)
    with pytest.raises(IndexOverflowError):
        next(SequenceCursor(last, CTX))


def test_rekey_changes_future_boxes(write_cap, entropy):
    fresh = rekey(write_cap, entropy)
    assert keys_at(fresh, CTX, fresh.index).box_id != keys_at(write_cap, CTX, write_cap.index).box_id


def test_recover_root_from_a_leaked_signing_key(write_cap):
    keys = keys_at(write_cap, CTX, write_cap.index)
    signing_key = write_cap.root_private * keys.blinding
    assert recover_root(signing_key, keys.blinding) == write_cap.root_private


def test_signature_nonce_is_derived_from_signing_key_and_ciphertext(write_cap):
    keys = keys_at(write_cap, CTX, write_cap.index)
    box = seal(keys, write_cap, b'deterministic')
    signing_key = write_cap.root_private * keys.blinding
    assert box.signature[:32] == base_mult(signature_nonce(signing_key, box.ciphertext)).encoded
    assert seal(keys, write_cap, b'deterministic') == box


def test_capability_encodings(write_cap):
    assert WriteCap.from_bytes(write_cap.to_bytes()) == write_cap
    read_cap = read_cap_from(write_cap)
    assert len(read_cap.to_bytes()) == 72 and len(write_cap.to_bytes()) == 104
    assert ReadCap.from_bytes(read_cap.to_bytes()) == read_cap
    with pytest.raises(EncodingError):
        ReadCap.from_bytes(read_cap.to_bytes()[:-1])


def test_write_cap_with_mismatched_keys_rejected(write_cap):
    data = bytearray(write_cap.to_bytes())
    data[:32] = GroupScalar(3).to_bytes()
    with pytest.raises(EncodingError):
        WriteCap.from_bytes(bytes(data))


@settings(max_examples=20, deadline=None)
@given(message=st.binary(max_size=300))
def test_any_message_survives_sealing(message):
    cap = generate_write_cap()
    keys = keys_at(cap, CTX, cap.index)
    box = BacapBox.from_bytes(seal(keys, cap, message).to_bytes())
    assert open_box(keys, box) == message


def test_truncated_box_encoding():
    with pytest.raises(EncodingError):
        BacapBox.from_bytes(b'\x00' * 50)
