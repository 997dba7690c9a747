# 工作负载模块
