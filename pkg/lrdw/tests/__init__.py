import pytest

pytest.register_assert_rewrite("lrdw.tests.utils")
