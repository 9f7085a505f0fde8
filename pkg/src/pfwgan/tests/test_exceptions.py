# -*- coding: utf-8 -*-
import json
from unittest import TestCase

from pfwgan.exceptions import (
    ChecksumFailure,
    ConfigInvalid,
    DataInvalid,
    DegenerateBatch,
    EmptyTable,
    ExitCode,
    IOFault,
    NonFiniteLoss,
    NonFiniteValue,
    TruncatedCheckpoint,
    UnseenCategory,
    unexpected_error_handler,
)

__author__ = 'pfwgan'


class TestExceptions(TestCase):
    def test_exit_codes(self):
        self.assertEqual(ConfigInvalid().exit_code, ExitCode.CONFIG_INVALID)
        self.assertEqual(EmptyTable().exit_code, ExitCode.DATA_INVALID)
        self.assertEqual(NonFiniteLoss().exit_code, ExitCode.TRAINING_FAULT)
        self.assertEqual(NonFiniteValue().exit_code, ExitCode.TRAINING_FAULT)
        self.assertEqual(TruncatedCheckpoint().exit_code, ExitCode.IO_FAULT)
        codes = {ExitCode.CONFIG_INVALID, ExitCode.DATA_INVALID, ExitCode.TRAINING_FAULT, ExitCode.IO_FAULT}
        self.assertEqual(len(codes), 4)
        self.assertNotIn(ExitCode.SUCCESS, codes)

    def test_hierarchy(self):
        self.assertTrue(issubclass(UnseenCategory, DataInvalid))
        self.assertTrue(issubclass(TruncatedCheckpoint, ChecksumFailure))
        self.assertTrue(issubclass(ChecksumFailure, IOFault))

    def test_default_detail(self):
        self.assertEqual(DegenerateBatch().detail, 'Batch normalization needs at least two rows in train mode')
        self.assertEqual(str(EmptyTable(detail='nothing left')), 'nothing left')

    def test_to_dict(self):
        e = UnseenCategory(detail='Unseen category', fields=['color'], data={'value': 'teal'})
        self.assertEqual(
            e.to_dict(),
            {
                'kind': 'UnseenCategory',
                'detail': 'Unseen category',
                'fields': ['color'],
                'data': {'value': 'teal'},
                'exit_code': ExitCode.DATA_INVALID,
            },
        )
        self.assertEqual(json.loads(e.to_json())['kind'], 'UnseenCategory')

    def test_unexpected_error_handler(self):
        with self.assertLogs('pfwgan.exceptions', level='ERROR'):
            self.assertEqual(unexpected_error_handler(RuntimeError('boom')), ExitCode.UNEXPECTED)
