import pytest
from hypothesis import given, settings, strategies as st

from mixnet_workbench.crypto_core import (
    GROUP_ORDER,
    AuthenticationError,
    EntropyError,
    GroupElement,
    GroupScalar,
    InstrumentedNike,
    InvalidPointError,
    InvalidScalarError,
    KdfState,
    UnknownSuiteError,
    WideBlockCipher,
    aead_open,
    aead_seal,
    base_mult,
    get_kem,
    get_nike,
    get_suite,
    hash256,
    kdf_expand,
    kdf_scalar,
    nonce_for,
    read_entropy,
    scalar_mult,
    sign_with_scalar,
    signature_nonce,
    suite_names,
    verify_signature,
    xor_bytes,
)

scalars = st.integers(min_value=1, max_value=GROUP_ORDER - 1).map(GroupScalar)


class TestGroup:
    @settings(max_examples=25, deadline=None)
    @given(a=scalars, b=scalars)
    def test_blinding_composes(self, a, b):
        assert scalar_mult(base_mult(a), b) == base_mult(a * b)

    @settings(max_examples=25, deadline=None)
    @given(a=scalars)
    def test_inverse_undoes_multiplication(self, a):
        point = base_mult(GroupScalar(5))
        assert scalar_mult(scalar_mult(point, a), a.inverse()) == point

    def test_zero_scalar_gives_identity(self):
        assert base_mult(GroupScalar(0)).is_identity

    def test_zero_has_no_inverse(self):
        with pytest.raises(InvalidScalarError):
            GroupScalar(0).inverse()

    def test_unreduced_scalar_rejected(self):
        with pytest.raises(InvalidScalarError):
            GroupScalar(GROUP_ORDER)

    def test_invalid_point_rejected(self):
        with pytest.raises(InvalidPointError):
            GroupElement.from_bytes(b'\xff' * 32)
        with pytest.raises(InvalidPointError):
            GroupElement.from_bytes(b'\x00' * 31)

    def test_scalar_encoding_is_little_endian(self):
        assert GroupScalar(1).to_bytes() == b'\x01' + b'\x00' * 31
        assert GroupScalar.from_bytes(GroupScalar(12345).to_bytes()) == GroupScalar(12345)

    def test_raw_scalar_signatures_verify(self, entropy):
        secret = GroupScalar.random(entropy)
        public = base_mult(secret)
        signature = sign_with_scalar(secret, public, b'message', signature_nonce(secret, b'message'))
        assert verify_signature(public, b'message', signature)
        assert not verify_signature(public, b'other message', signature)
        assert not verify_signature(base_mult(GroupScalar.random(entropy)), b'message', signature)

    def test_blinded_key_signs_for_blinded_public(self, entropy):
        root, blinding = GroupScalar.random(entropy), GroupScalar.random(entropy)
        blinded_public = scalar_mult(base_mult(root), blinding)
        signature = sign_with_scalar(root * blinding, blinded_public, b'box', signature_nonce(root * blinding, b'box'))
        assert verify_signature(blinded_public, b'box', signature)


class TestKdf:
    def test_expand_is_deterministic_and_label_separated(self):
        state = KdfState(b'\x01' * 32)
        assert kdf_expand(state, b'a', 3) == kdf_expand(state, b'a', 3)
        assert kdf_expand(state, b'a', 1) != kdf_expand(state, b'b', 1)
        assert all(len(out) == 32 for out in kdf_expand(state, b'a', 3))

    def test_expand_output_count_bounds(self):
        with pytest.raises(ValueError):
            kdf_expand(KdfState(b'\x01' * 32), b'a', 0)

    def test_kdf_scalar_is_nonzero(self):
        assert kdf_scalar(KdfState(b'\x02' * 32), b'k').value != 0

    def test_signature_nonce_comes_from_the_kdf(self):
        secret = GroupScalar(424242)
        expected = kdf_scalar(KdfState(hash256(secret.to_bytes(), b'ciphertext')), b'signature-nonce')
        assert signature_nonce(secret, b'ciphertext') == expected
        assert signature_nonce(secret, b'ciphertext') != signature_nonce(secret, b'other')
        assert signature_nonce(secret, b'ciphertext') != signature_nonce(GroupScalar(424243), b'ciphertext')

    def test_zero_nonce_refused(self):
        secret = GroupScalar(7)
        with pytest.raises(InvalidScalarError):
            sign_with_scalar(secret, base_mult(secret), b'm', GroupScalar(0))

    def test_hash256_is_injective_over_part_boundaries(self):
        assert hash256(b'ab', b'c') != hash256(b'a', b'bc')

    def test_xor_rejects_length_mismatch(self):
        with pytest.raises(ValueError):
            xor_bytes(b'ab', b'a')


class TestAead:
    def test_seal_open(self):
        key, nonce = b'k' * 32, nonce_for(b'box')
        assert aead_open(key, nonce, aead_seal(key, nonce, b'hello', b'ad'), b'ad') == b'hello'

    def test_empty_plaintext_seals_to_nonempty_ciphertext(self):
        assert len(aead_seal(b'k' * 32, nonce_for(b'x'), b'')) > 0

    def test_wrong_associated_data_fails(self):
        key, nonce = b'k' * 32, nonce_for(b'box')
        with pytest.raises(AuthenticationError):
            aead_open(key, nonce, aead_seal(key, nonce, b'hello', b'ad'), b'other')


class TestSprp:
    @settings(max_examples=30, deadline=None)
    @given(block=st.binary(min_size=33, max_size=400))
    def test_decrypt_inverts_encrypt(self, block):
        cipher = WideBlockCipher(b'\x07' * 64)
        assert cipher.decrypt(cipher.encrypt(block)) == block

    def test_single_bit_flip_scrambles_everything(self):
        cipher = WideBlockCipher(b'\x07' * 64)
        block = bytes(256)
        ciphertext = bytearray(cipher.encrypt(block))
        ciphertext[100] ^= 1
        tampered = cipher.decrypt(bytes(ciphertext))
        assert tampered[:32] != block[:32]
        assert sum(a != b for a, b in zip(tampered, block)) > 200


class TestSuites:
    def test_registry_names(self):
        assert {'x25519', 'x448', 'x25519-kem', 'x448-kem', 'mlkem768-x25519', 'mlkem768-x448'} <= set(suite_names())

    def test_unknown_suite(self):
        with pytest.raises(UnknownSuiteError):
            get_suite('rsa')

    def test_kind_checks(self):
        with pytest.raises(UnknownSuiteError):
            get_nike('x25519-kem')
        with pytest.raises(UnknownSuiteError):
            get_kem('x25519')

    @pytest.mark.parametrize('name', ['x25519', 'x448'])
    def test_nike_agreement_and_blinding_commute(self, name, entropy):
        nike = get_nike(name)
        a_private, a_public = nike.generate_keypair(entropy)
        b_private, b_public = nike.generate_keypair(entropy)
        assert nike.exchange(a_private, b_public) == nike.exchange(b_private, a_public)
        factor = read_entropy(entropy, nike.private_key_size)
        assert nike.exchange(a_private, nike.blind(b_public, factor)) == nike.exchange(
            factor, nike.exchange(a_private, b_public)
        )

    @pytest.mark.parametrize('name', ['x25519-kem', 'x448-kem', 'mlkem768-x25519', 'mlkem768-x448'])
    def test_kem_round_trip_and_sizes(self, name, entropy):
        kem = get_kem(name)
        private, public = kem.generate_keypair(entropy)
        assert (len(private), len(public)) == (kem.private_key_size, kem.public_key_size)
        encapsulation = kem.encapsulate(public, entropy)
        assert len(encapsulation.ciphertext) == kem.ciphertext_size
        assert kem.decapsulate(private, encapsulation.ciphertext) == encapsulation.shared_secret

    def test_hybrid_ciphertext_sizes(self):
        assert get_kem('mlkem768-x25519').ciphertext_size == 1088 + 32
        assert get_kem('mlkem768-x448').ciphertext_size == 1088 + 56

    def test_instrumented_nike_counts_operations(self, entropy):
        nike = InstrumentedNike(get_nike('x25519'))
        private, public = nike.generate_keypair(entropy)
        nike.reset()
        nike.exchange(private, public)
        nike.blind(public, private)
        assert nike.public_key_operations == 2


class _Failing:
    def randbytes(self, n):
        raise OSError('no entropy')


def test_entropy_failure_is_reported():
    with pytest.raises(EntropyError):
        read_entropy(_Failing(), 8)
