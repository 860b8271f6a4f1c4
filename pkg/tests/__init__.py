# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0
